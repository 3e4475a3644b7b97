"""Falsification of an adaptive-cruise-control loop with prior knowledge.

Modules: ``sim`` (two-vehicle simulator), ``idm`` (controller under test),
``stl`` (robustness monitor), ``scenario`` (action encoding), ``guard``
(safe-start projection), ``model`` (model-based search), ``ddpg`` (agent),
``loops`` (falsification regimes), ``cli``.
"""

__version__ = "0.1.0"
