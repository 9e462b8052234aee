"""Token embeddings and paragraph encoders."""

from .compose import (
    PARAGRAPH_MODES,
    compose,
    compose_backward,
    embed_tokens,
    encode_paragraph,
    encode_units,
    encode_units_backward,
)
from .features import FEATURES, feature_ids
from .rnn import CELLS, birnn_backward, birnn_forward, birnn_forward_backward, init_rnn
from .vocab import (
    CHEM_ID,
    PAD_ID,
    RESERVED,
    UNK_ID,
    ContextualStore,
    EmbeddingTable,
    Vocabulary,
    load_embedding_file,
    normalize_token,
)
