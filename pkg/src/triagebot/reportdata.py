"""Reference results from the production deployment this engine models.

Used only for side-by-side display in evaluation reports. Never used as a
test oracle: the synthetic corpus is not the production dataset and makes no
claim of reproducing these numbers.
"""

# Classifier comparison on the production test split (top-1/top-3 contact
# reason accuracy and top-1/top-3 department accuracy, as fractions).
REFERENCE_CLASSIFIERS = {
    "LR": {"top1": 0.428, "top3": 0.636, "dept_top1": 0.778, "dept_top3": 0.846},
    "RF": {"top1": 0.407, "top3": 0.612, "dept_top1": 0.752, "dept_top3": 0.827},
    "MLP": {"top1": 0.441, "top3": 0.651, "dept_top1": 0.782, "dept_top3": 0.850},
}

# Text-representation comparison (top-1 contact reason accuracy).
REFERENCE_TEXT_VARIANTS = {
    "BoW alone": 0.3814,
    "BoW + tabular data (V1)": 0.4411,
    "BERT classifier": 0.4557,
    "BERT classifier logit heads + tabular data": 0.5310,
    "Last layer LM BERT + tabular data": 0.5320,
    "Last 4 layers LM BERT concat + tabular data": 0.5305,
}

# Production transfer rate (fraction of auto-routed chats later moved to
# another department) and average messages per ticket.
REFERENCE_PRODUCTION = {
    "Human triage": {"transfer_rate": 0.128, "avg_msgs": 18.2},
    "Heuristic rules": {"transfer_rate": 0.183, "avg_msgs": 11.2},
    "V1 - Bag-of-words (80%)": {"transfer_rate": 0.139, "avg_msgs": 13.2},
    "V2 - BERT (80%)": {"transfer_rate": 0.103, "avg_msgs": 13.7},
    "V2 - BERT (100%)": {"transfer_rate": 0.132, "avg_msgs": 14.2},
}

# Production dataset shape: chronological split of the annotated chats and
# the class filter that trims rare contact reasons.
REFERENCE_DATASET = {
    "total_chats": 639159,
    "train_chats": 511327,
    "validation_chats": 63916,
    "test_chats": 63916,
    "classes_raw": 306,
    "classes_kept": 235,
    "min_class_count": 50,
    "deep_subset": {"train": 178578, "validation": 19843, "test": 66141},
}

# Context gate: annotated first messages and the deployed model's accuracy.
REFERENCE_CONTEXT_GATE = {
    "annotated_chats": 5348,
    "has_context": 2926,
    "not_enough_context": 2422,
    "test_accuracy": 0.85,
    "vocabulary_size": 5000,
    "ngram_max": 3,
}

# Hyperparameter search budget used for the production classifiers.
REFERENCE_SEARCH_BUDGET = 100

# Tabular feature count in the production feature store.
REFERENCE_TABULAR_FEATURES = 66

# Token truncation limit applied before dense text encoding.
REFERENCE_TOKEN_LIMIT = 64

# Coverage fraction used for the staged auto-routing rollout.
REFERENCE_COVERAGE = 0.8
