"""tracelab: numerical verification of trace-formula identities for cusp forms.

Subpackages follow the pipeline: exact exponential sums (`arith`), special
functions (`specfun`), smooth test functions and integral transforms
(`transforms`), coefficient fixtures (`forms`), the Petersson average
(`traceformula`), the dual summation identity (`voronoi`), and L-function
continuation plus functional-equation residuals (`lfun`).
"""

__version__ = "0.1.0"
