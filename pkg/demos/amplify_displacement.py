"""Walkthrough of the amplification protocol on a single oscillator.

A small coherent displacement alpha_i is sandwiched between a squeeze and
an anti-squeeze of equal magnitude.  Along the squeezed axis the sandwich
acts as a pure displacement with amplitude alpha_f = alpha_i * e^r, so the
readout sees an amplified signal while the state stays coherent.

Run with:  python3 demos/amplify_displacement.py
"""

import math

import numpy as np

from squeezeamp import (
    Displacement,
    FockSpace,
    NoiseParams,
    SqueezeParam,
    amplify_displacement,
    amplify_with_noise,
    coherent_state,
    fidelity,
    squeeze_db,
)

ALPHA_I = 0.2
G = 2 * math.pi * 50.2e3  # parametric drive rate, rad/s


def main():
    print("ideal gain law: alpha_f = alpha_i cosh r + alpha_i* e^(i theta) sinh r")
    print(f"alpha_i = {ALPHA_I}")
    print()
    print(" r      dB      alpha_f    gain")
    for r in (0.5, 1.0, 1.5, 2.0, 2.26, 2.54):
        alpha_f = amplify_displacement(ALPHA_I, SqueezeParam(r))
        print(f"{r:4.2f}  {squeeze_db(r):6.2f}  {abs(alpha_f):8.4f}  {abs(alpha_f) / ALPHA_I:6.2f}")

    # the protocol is noiseless in the ideal case: the output is a coherent
    # state, not a squeezed one, so no extra quantum noise is added
    r = 1.5
    alpha_f = amplify_displacement(ALPHA_I, SqueezeParam(r))
    res = amplify_with_noise(ALPHA_I, r, NoiseParams.none(), G)
    lab = res.lab_density(FockSpace(64))
    target = coherent_state(Displacement(alpha_f), FockSpace(64))
    amps = target.amps
    overlap = float(np.real(amps.conj() @ lab.matrix @ amps))
    print()
    print(f"noiseless protocol at r = {r}: overlap with the coherent state "
          f"|alpha_f> = {overlap:.10f}")

    # with heating and dephasing on, the mean amplitude falls short of e^r
    noise = NoiseParams(heating_rate=20.0, dephasing_rate=18.0)
    res = amplify_with_noise(ALPHA_I, 2.26, noise, G)
    amp = abs(res.mean_lowering)
    print()
    print("with heating 20 quanta/s and dephasing 18 1/s at r = 2.26:")
    print(f"  ideal |alpha_f| = {abs(amplify_displacement(ALPHA_I, SqueezeParam(2.26))):.4f}")
    print(f"  noisy |<a>|     = {amp:.4f}")


if __name__ == "__main__":
    main()
