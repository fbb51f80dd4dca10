"""Decentralized agent-hosting runtime.

Nodes host task-handling agents behind a JSON-RPC front door, register and
discover agents through a Kademlia DHT plus gossip presence layer, and
delegate tasks peer to peer. A registry service keeps the global view and a
benchmark harness drives multi-node scenarios deterministically.
"""

__version__ = "0.1.0"
