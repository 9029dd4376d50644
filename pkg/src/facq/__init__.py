"""Cost- and context-aware test-time feature acquisition.

Trains a denoising autoencoder with a binary (fixed-point) representation
layer plus a fine-tuned predictor, then incrementally decides which unknown
feature to acquire next by combining prediction-gradient sensitivity,
reconstruction bit probabilities, and per-feature acquisition cost.
"""

__version__ = "0.1.0"
