"""cayleylab: Cayley-path worst-to-average-case reductions at desk scale.

Library layout mirrors the subsystem boundaries: ``numerics`` (precision,
RNG, unitaries, polynomials), ``cayley`` (unitary deformations), ``circuits``,
``simulator``, ``rational`` (the known denominator Q), ``interp`` (robust
Berlekamp-Welch over the reals), ``boson`` (permanents), ``toymodel``
(noisy convergence to uniformity), ``pipelines`` (end-to-end reductions) and
``cli``.
"""

__version__ = "0.1.0"
