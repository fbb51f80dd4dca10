"""XOR-metric k-bucket routing table."""

from __future__ import annotations

import hashlib
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional

ID_BITS = 160
DEFAULT_K = 20


class SelfInsertError(ValueError):
    """A routing table never holds its own owner."""


class NoBucketError(ValueError):
    """Identical ids have distance zero and no bucket."""


def key_digest(key: str) -> int:
    """Deterministically map a key string onto the 160-bit id space."""
    return int.from_bytes(hashlib.sha1(key.encode("utf-8")).digest(), "big")


def xor_distance(a: int, b: int) -> int:
    return a ^ b


def bucket_index(owner: int, other: int) -> int:
    """floor(log2(xor distance)) — the bucket a contact belongs to."""
    distance = owner ^ other
    if distance == 0:
        raise NoBucketError("identical ids have no bucket")
    return distance.bit_length() - 1


@dataclass(frozen=True)
class Contact:
    node_id: int
    ip: str
    port: int

    def hex_id(self) -> str:
        return f"{self.node_id:040x}"

    @property
    def address(self):
        return self.ip, self.port


def contact_to_doc(contact: Contact) -> dict:
    # ids travel as 40-hex strings; 160-bit ints are not JSON-safe
    return {"node_id": contact.hex_id(), "ip": contact.ip, "port": contact.port}


def contact_from_doc(doc: dict) -> Contact:
    return Contact(int(doc["node_id"], 16), str(doc["ip"]), int(doc["port"]))


class RoutingTable:
    """160 LRU-ordered buckets of up to k contacts each.

    Mutation is two-phase so callers can run the liveness probe themselves:
    observe() either places the contact or hands back the least-recently-seen
    resident of the full bucket; the caller then calls touch() (probe passed,
    candidate dropped) or replace() (probe failed, candidate admitted).
    """

    def __init__(self, owner_id: int, k: int = DEFAULT_K):
        self.owner_id = owner_id
        self.k = k
        # bucket order inside each OrderedDict: least-recently seen first
        self._buckets: List[OrderedDict[int, Contact]] = [OrderedDict() for _ in range(ID_BITS)]

    def __len__(self) -> int:
        return sum(len(b) for b in self._buckets)

    def __contains__(self, node_id: int) -> bool:
        try:
            return node_id in self._buckets[self.bucket_of(node_id)]
        except NoBucketError:
            return False

    def contacts(self) -> Iterator[Contact]:
        for bucket in self._buckets:
            yield from bucket.values()

    def bucket_of(self, node_id: int) -> int:
        return bucket_index(self.owner_id, node_id)

    def bucket_contents(self, index: int) -> List[Contact]:
        """Bucket residents, least-recently seen first."""
        return list(self._buckets[index].values())

    def observe(self, contact: Contact) -> Optional[Contact]:
        """Place or refresh a contact; returns the resident to probe when full."""
        if contact.node_id == self.owner_id:
            raise SelfInsertError("cannot insert the owner into its own table")
        bucket = self._buckets[self.bucket_of(contact.node_id)]
        if contact.node_id in bucket:
            bucket[contact.node_id] = contact  # address may have changed
            bucket.move_to_end(contact.node_id)
            return None
        if len(bucket) < self.k:
            bucket[contact.node_id] = contact
            return None
        return next(iter(bucket.values()))

    def insert(self, contact: Contact, probe: Optional[Callable[[Contact], bool]] = None) -> bool:
        """One-shot insert with a synchronous probe; True if contact now resides."""
        resident = self.observe(contact)
        if resident is None:
            return True
        alive = probe(resident) if probe is not None else True
        if alive:
            self.touch(resident.node_id)
            return False
        self.replace(resident.node_id, contact)
        return True

    def touch(self, node_id: int) -> None:
        try:
            bucket = self._buckets[self.bucket_of(node_id)]
        except NoBucketError:
            return
        if node_id in bucket:
            bucket.move_to_end(node_id)

    def replace(self, old_id: int, contact: Contact) -> None:
        self.remove(old_id)
        self.observe(contact)

    def remove(self, node_id: int) -> None:
        try:
            self._buckets[self.bucket_of(node_id)].pop(node_id, None)
        except NoBucketError:
            pass

    def find_closest(self, key: int, count: int) -> List[Contact]:
        """Up to count contacts by ascending XOR distance to key.

        Buckets are visited in non-decreasing distance bands instead of
        sorting the whole table: the key's home bucket holds everything
        nearer than 2^home, all lower buckets together form the next band
        (their distances interleave within [2^home, 2^(home+1))), and each
        higher bucket is its own strictly-farther band.
        """
        if count < 1:
            raise ValueError("count must be >= 1")
        if key == self.owner_id:
            bands: List[List[int]] = [[i] for i in range(ID_BITS)]
        else:
            home = bucket_index(self.owner_id, key)
            bands = [[home], list(range(home))]
            bands.extend([i] for i in range(home + 1, ID_BITS))
        found: List[Contact] = []
        for band in bands:
            members = [c for i in band for c in self._buckets[i].values()]
            if not members:
                continue
            members.sort(key=lambda c: (c.node_id ^ key, c.node_id))
            found.extend(members)
            if len(found) >= count:
                break
        return found[:count]
