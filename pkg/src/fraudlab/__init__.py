"""Imbalance-aware fraud-detection experimentation pipeline.

Modules: txdata (PaySim-schema data handling and a constrained synthetic
generator), prep (feature encoding and stratified splitting), resample
(SMOTE oversampling), models (natively implemented classifiers), metrics
(imbalance-aware evaluation), tune (stratified grid search), cli (batch
front end). Hot numeric loops live in fraudlab.kernels with jit and
pure-numpy backends.
"""

__version__ = "0.1.0"
