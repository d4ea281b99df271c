"""cexlab: computable counterexample constructions in analysis.

Three mechanisms, each built as an explicit object whose quantitative
estimates can be checked numerically:

* dyadic multi-bump perturbations that are smooth off a small closed set
  yet produce a definite increment of the antiderivative across every gap
  (``intervals``, ``holder``, ``bump``);
* a parametrically pumped oscillator driving wave equations with a Hoelder
  continuous speed whose solutions grow fast enough to leave every Gevrey
  class (``wavegrowth``, ``gevrey``);
* rescaled divergence-free flows on the torus that concentrate Sobolev
  norm at small scales under a fixed W^{1,p} budget (``fields``,
  ``transport``).

The ``cexlab`` command line front end runs the demos and emits CSV.
"""

__version__ = "0.1.0"
