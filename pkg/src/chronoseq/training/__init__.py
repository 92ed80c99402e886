"""Corpus preparation, sample packing, and the optimization loop."""

from .packing import EncodedExample, PackedRow, PackedBatch, pack  # noqa: F401
from .optimizer import AdamW  # noqa: F401
from .corpus import CorpusReport, PreparedCorpus, prepare_corpus, encode_examples  # noqa: F401
from .loop import TrainConfig, TrainResult, TrainingDiverged, train, write_loss_curves  # noqa: F401
