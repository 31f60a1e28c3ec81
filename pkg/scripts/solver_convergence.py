"""Step-halving study of the forward solver on the published pole sets.

Prints the phase-shift change per halving and the observed order.
"""
import argparse
from dataclasses import dataclass

import numpy as np

from susyinv.poles import PoleSet
from susyinv.solver import SolverConfig, phase_shift_from_potential
from susyinv.susy import build_potential


@dataclass
class Config:
    steps: tuple = (0.032, 0.016, 0.008, 0.004, 0.002)
    k: tuple = (0.5, 1.0, 2.0)
    r_start: float = 0.032
    r_match: tuple = (20.0, 22.0)


SETS = {
    "S": PoleSet(0, (-0.0401, -0.7540, 0.6152, 2.0424, 4.1650, 4.6)),
    "D": PoleSet(2, (-0.4294, -0.8827, -8.7653, 0.7750, 0.4376)),
}


def main(cfg: Config):
    k = np.array(cfg.k)
    for name, poles in SETS.items():
        pot = build_potential(poles)
        d = []
        for h in cfg.steps:
            sc = SolverConfig(step=h, r_start=cfg.r_start, r_refine=cfg.r_start + 1e-9, origin_refine=1, r_match=cfg.r_match, r_max=cfg.r_match[1])
            d.append(phase_shift_from_potential(pot, k, sc))
        print(f"{name}-wave, k = {cfg.k}")
        for i in range(1, len(d) - 1):
            e1, e2 = np.abs(d[i - 1] - d[i]), np.abs(d[i] - d[i + 1])
            print(f"  h = {cfg.steps[i]:.3g}: change {np.array2string(e2, precision=2)}  order {np.array2string(np.log2(e1 / e2), precision=2)}")


if __name__ == "__main__":
    argparse.ArgumentParser(description=__doc__.splitlines()[0]).parse_args()
    main(Config())
