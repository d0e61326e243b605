"""Bot-account detection for open-source collaboration event logs.

Pipeline: parse event archives into per-account timelines, extract a
17-feature behavioral vector per account, train an undersampled bagging
ensemble of from-scratch weak classifiers, and evaluate with ROC/AUC and
feature-importance analyses. A FastAPI annotation service plus browser UI
covers the human-in-the-loop labeling workflow.
"""

__version__ = "0.1.0"
