"""Walk through the ITU-grid arithmetic behind the channel plan.

The pair source emits signal/idler photons on grid channels at equal
spectral intervals from the pump.  This script builds the three-pair
plan used throughout the package and shows the pairing rule in action.
"""

from qdemux import build_plan, channel_frequency, channel_wavelength, paired_channel

print("C-band grid rule: channel n sits at 190.0 + n/10 THz")
for index in (20, 34, 48):
    print(f"  C{index}: {channel_frequency(index):.1f} THz = "
          f"{channel_wavelength(index):.4f} nm")

print("\nPairing rule: idler = 2*pump - signal (energy conservation)")
for signal in (24, 22, 20):
    print(f"  signal C{signal} + pump C34 -> idler C{paired_channel(signal, 34)}")

print("\nThree-pair plan around a C34 pump (offsets 10, 12, 14):")
plan = build_plan(34, [10, 12, 14])
for pair in plan:
    s, i = pair.signal, pair.idler
    print(f"  {pair.label}: {s.name} ({s.center_wavelength_nm:.2f} nm)  <->  "
          f"{i.name} ({i.center_wavelength_nm:.2f} nm)")

print("\nEvery pair is symmetric about the pump:")
for pair in plan:
    f_mean = (pair.signal.center_frequency_thz + pair.idler.center_frequency_thz) / 2
    print(f"  {pair.label}: mean frequency {f_mean:.4f} THz "
          f"(pump {pair.pump.center_frequency_thz:.4f} THz)")
