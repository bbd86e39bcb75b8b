from .pooling import build_node, cosine, node_text, normalize, pool_graph
from .providers import (
    EmbeddingProvider,
    EmbeddingSpec,
    HashingEmbeddingProvider,
    embed_text,
    get_provider,
    same_token_bag,
    tokenize,
)
