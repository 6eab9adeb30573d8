"""Stance classification and retweet-network triage toolkit."""

from .corpus import (
    Corpus,
    DuplicateTweetIdError,
    PreprocessedTweet,
    Tweet,
    TweetGroup,
    extract_hashtags,
    group_tweets,
    ingest_corpus,
    load_labels,
    merge_auxiliary,
    prepare_corpus,
    preprocess,
    preprocess_corpus,
    propagate_labels,
    save_labels,
    serialize_corpus,
)
from .embeddings import (
    AverageEmbedding,
    EmbeddingTable,
    SequenceEmbedding,
    TweetMatrix,
    embed_average,
    embed_sequence,
    load_embedding_table,
)
from .evaluation import (
    Calibration,
    EvaluationReport,
    FoldSplit,
    auc,
    calibrate_threshold,
    confusion,
    cross_validate,
    f1_report,
    make_folds,
    pr_curve,
)
from .labels import (
    CLASS_INDEX,
    CLASS_ORDER,
    N_CLASSES,
    ProbDist,
    Provenance,
    Stance,
    StanceLabel,
    parse_stance,
)
from .models import (
    CnnModel,
    HashtagPmiClassifier,
    LogRegModel,
    PmiTable,
    RandomClassifier,
    SoftmaxRegression,
    TextCnn,
    TrainConfig,
    cnn_forward,
    cnn_gradients,
    compute_pmi,
    hashtag_predict,
    init_cnn,
    load_model,
    predict_logreg,
    random_predict,
    save_model,
    softmax,
    train_cnn,
    train_logreg,
    upsample,
)
from .network import (
    CandidateEdge,
    EdgeRecord,
    EdgeStatus,
    RetweetGraph,
    build_graph,
    candidate_edges,
    dump_graph,
    k_core,
    label_edges,
    load_graph,
)
from .triage import (
    AnnotationDecision,
    ItemState,
    TriageItem,
    TriageStats,
    Verdict,
    apply_decisions,
    build_queue,
    load_queue,
    save_queue,
)

__version__ = "0.1.0"
