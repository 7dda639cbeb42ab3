"""Gauss-Legendre nodes shared by both kernel backends."""

import numpy as np

GL_ORDER = 15

_nodes, _weights = np.polynomial.legendre.leggauss(GL_ORDER)
GL_NODES = np.ascontiguousarray(_nodes, dtype=np.float64)
GL_WEIGHTS = np.ascontiguousarray(_weights, dtype=np.float64)

# Family codes understood by the kernels.  Dirac never reaches a kernel.
FAM_EXPONENTIAL = 0
FAM_NORMAL = 1
FAM_WEIBULL = 2
FAM_MIXTURE = 3
