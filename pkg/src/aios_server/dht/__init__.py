"""Kademlia-style agent registry: XOR routing, k-buckets, replicated records."""

from .node import (
    DEFAULT_ALPHA,
    DEFAULT_REPLICAS,
    DhtNode,
    LookupFailedError,
    LookupResult,
    StoreFailedError,
    StoreRecord,
)
from .routing import (
    DEFAULT_K,
    ID_BITS,
    Contact,
    NoBucketError,
    RoutingTable,
    SelfInsertError,
    bucket_index,
    contact_from_doc,
    contact_to_doc,
    key_digest,
    xor_distance,
)

__all__ = [
    "DEFAULT_ALPHA",
    "DEFAULT_K",
    "DEFAULT_REPLICAS",
    "Contact",
    "DhtNode",
    "ID_BITS",
    "LookupFailedError",
    "LookupResult",
    "NoBucketError",
    "RoutingTable",
    "SelfInsertError",
    "StoreFailedError",
    "StoreRecord",
    "bucket_index",
    "contact_from_doc",
    "contact_to_doc",
    "key_digest",
    "xor_distance",
]
