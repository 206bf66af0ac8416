from .classifiers import (
    BoostedTreesModel,
    DecisionTreeModel,
    LogisticModel,
    NaiveBayesModel,
    RandomForestModel,
)
from .tuning import (
    MODEL_KINDS,
    ModelSpec,
    accuracy,
    grid_search_cv,
    learning_curve,
    load_model,
    predict_labels,
    predict_scores,
    save_model,
    train,
)

__all__ = [
    "BoostedTreesModel",
    "DecisionTreeModel",
    "LogisticModel",
    "NaiveBayesModel",
    "RandomForestModel",
    "MODEL_KINDS",
    "ModelSpec",
    "accuracy",
    "grid_search_cv",
    "learning_curve",
    "load_model",
    "predict_labels",
    "predict_scores",
    "save_model",
    "train",
]
