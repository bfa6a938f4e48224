"""Evolutionary training of variational quantum circuit policies.

Layers, bottom up:

- qsim: dense statevector simulator (gates, expectations, amplitude encoding)
- mps: trainable matrix-product-state feature extractor
- envs: cart-pole and empty-gridworld environments, implemented from scratch
- agents: the two circuit policies and their flat-genome interface
- evo: truncation-selection evolution strategy with deterministic seeding
- cli: train / eval / resume front end with CSV stats and JSON checkpoints
"""

__version__ = "0.1.0"
