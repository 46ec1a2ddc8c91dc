"""Chains shared by several test modules."""

import numpy as np

from fermichain.chain_model import CouplingSet, xydm_couplings

# gapped real chain of range two (genus three)
L2_GAPPED = CouplingSet.from_nonnegative([-0.5, 1.0, 0.6], [0, 0.7, 0.4])


def lift(c1, d, c0=3.0):
    """Range-two chain whose curve degenerates onto that of ``c1`` as ``d -> 0``.

    ``Theta`` and ``Xi`` of the range-one chain are multiplied by
    ``z + 1/z - c0``, which adds a double branch point off the unit circle;
    ``d`` perturbs ``A_{+-2}`` to split it into two simple ones.
    """
    f = np.array([1.0, -c0, 1.0])
    A = np.convolve(c1.A, f).real.astype(complex)
    B = np.convolve(c1.B, f)
    A[0] += d
    A[4] += d
    return CouplingSet(2, A, B)


def pinch_family(kind, deltas):
    """Gapped chains approaching a real (Ising) or a complex (XX) pinching."""
    if kind == "real":
        return [xydm_couplings(1.0, 0.0, 2.0 + d) for d in deltas]
    if kind == "complex":
        return [xydm_couplings(d, 0.0, 1.0) for d in deltas]
    raise ValueError(kind)
