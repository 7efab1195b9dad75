"""Design of solar-pumped laser ablation deflection campaigns for near-Earth
objects under epistemic uncertainty: analytic low-thrust propagation,
spacecraft formation sizing, evidence-theory uncertainty quantification and
robust multi-objective search.
"""

__version__ = "0.1.0"
