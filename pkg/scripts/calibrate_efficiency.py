"""Collection efficiency giving a target mean signal count per detector.

With eta = 1 and the capacity-equalizing power split every sub-band expects
the same signal count; this script solves for the lumped efficiency that
makes that count equal --target, under the scenario's channel.
"""

import argparse
import dataclasses

import numpy as np

from coopraman.allocation import allocate_power, expected_channel
from coopraman.channel import default_attenuation, load_attenuation
from coopraman.photonics import photon_scale
from coopraman.scenario import SystemConfig, load_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--target", type=float, default=10.0, help="signal photons per detector per interval")
    ap.add_argument("--scenario")
    ap.add_argument("--channel")
    args = ap.parse_args()

    cfg = load_scenario(args.scenario) if args.scenario else SystemConfig()
    cfg = dataclasses.replace(cfg, collection_efficiency=1.0)
    ch = load_attenuation(cfg, args.channel) if args.channel else default_attenuation(cfg)
    H = expected_channel(cfg, ch)
    P = allocate_power(H, cfg.power_per_sensor).P
    per_unit = H.H * photon_scale(cfg, P)        # counts at efficiency 1
    eff = args.target / per_unit.mean()
    print(f"H (mean)            {H.H.mean():.4g}")
    print(f"P per band          {P.mean():.4g} W")
    print(f"counts at eff = 1   {per_unit.mean():.4g} (spread {np.ptp(per_unit) / per_unit.mean():.2%})")
    print(f"collection_efficiency = {eff:.4g}")


if __name__ == "__main__":
    main()
