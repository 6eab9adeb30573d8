from .cnn import (
    CnnCache,
    CnnGradients,
    CnnModel,
    TextCnn,
    cnn_forward,
    cnn_gradients,
    init_cnn,
    train_cnn,
)
from .config import TrainConfig
from .io import load_model, save_model
from .logreg import (
    LogRegModel,
    SoftmaxRegression,
    logreg_proba,
    predict_logreg,
    softmax,
    train_logreg,
)
from .pmi import HashtagPmiClassifier, PmiTable, compute_pmi, hashtag_predict
from .sampling import RandomClassifier, random_predict, upsample

__all__ = [
    "CnnCache",
    "CnnGradients",
    "CnnModel",
    "TextCnn",
    "cnn_forward",
    "cnn_gradients",
    "init_cnn",
    "train_cnn",
    "TrainConfig",
    "load_model",
    "save_model",
    "LogRegModel",
    "SoftmaxRegression",
    "logreg_proba",
    "predict_logreg",
    "softmax",
    "train_logreg",
    "HashtagPmiClassifier",
    "PmiTable",
    "compute_pmi",
    "hashtag_predict",
    "RandomClassifier",
    "random_predict",
    "upsample",
]
