import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, ValidationError

from .exceptions import ContractViolation, ExportError, GraphFormatError
from .state_space import (
    EncodingConfig,
    SequenceKey,
    StateVector,
    Vector,
    decode,
    encode,
    flatten,
)

# Configure logging
logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

EncodedKey = Tuple[Vector, ...]


@dataclass(frozen=True)
class TransitionRecord:
    successor: StateVector
    utility: int
    count: int


@dataclass(frozen=True)
class Match:
    """Transitions retrieved for a situation, and how the stored key was found"""
    key: EncodedKey
    similarity: float
    mode: str
    transitions: List[TransitionRecord]


# Model file schema
class TransitionEntry(BaseModel):
    successor: List[int]
    utility: int
    count: int


class KeyEntry(BaseModel):
    key: List[List[int]]
    key_count: int
    transitions: List[TransitionEntry]


class EncodingSettings(BaseModel):
    sr: bool = True
    ea: bool = False
    n_features: int = 2


class GraphDocument(BaseModel):
    version: int
    encoding_config: EncodingSettings
    entries: List[KeyEntry] = []


class GraphStats(BaseModel):
    keys: int = 0
    transitions: int = 0
    evidence: int = 0


class TransitionGraph:
    """In-memory graph from state sequences (CS-long keys) to successor states.

    Key nodes carry the key experience count; edges carry utility U and evidence
    count C. Node identity is the encoded vector, so two states that encode alike
    are the same node. One learner writes a graph; readers only between writes.
    """

    _INITIAL_ROWS = 256

    def __init__(self, encoding: Optional[EncodingConfig] = None):
        self.encoding = encoding or EncodingConfig()
        self.G = nx.DiGraph()
        self.context_size: Optional[int] = None
        # Dense copy of the key vectors, in insertion order, for similarity scans
        self._key_nodes: List[tuple] = []
        self._key_rows: Dict[tuple, int] = {}
        self._vectors = np.zeros((0, 0))
        self._squared_norms = np.zeros(0)
        self._counts = np.zeros(0, dtype=np.int64)

    def __len__(self) -> int:
        return len(self._key_nodes)

    @property
    def transition_count(self) -> int:
        return self.G.number_of_edges()

    def stats(self) -> GraphStats:
        n = len(self._key_nodes)
        return GraphStats(
            keys=n,
            transitions=self.transition_count,
            evidence=int(self._counts[:n].sum()),
        )

    def key_count(self, key: SequenceKey) -> int:
        node = ("key", key.encoded(self.encoding))
        if node not in self.G:
            return 0
        return self.G.nodes[node]["count"]

    # Writing

    def record_transition(self, key: SequenceKey, successor: StateVector, delta_u: int) -> None:
        """Add one piece of evidence for key -> successor, shifting its utility by delta_u"""
        self._add(key.encoded(self.encoding), encode(successor, self.encoding), delta_u, 1)

    def _add(self, encoded_key: EncodedKey, vector: Vector, utility: int, count: int) -> None:
        if self.context_size is None:
            self.context_size = len(encoded_key)
        elif len(encoded_key) != self.context_size:
            raise ContractViolation(
                f"key of {len(encoded_key)} states in a graph of context size {self.context_size}")

        key_node = ("key", encoded_key)
        state_node = ("state", vector)
        if key_node not in self.G:
            self.G.add_node(key_node, kind="key", count=0)
            self._append_key_row(key_node, encoded_key)
        if state_node not in self.G:
            self.G.add_node(state_node, kind="state", state=decode(vector, self.encoding))

        edge = self.G.succ[key_node].get(state_node)
        if edge is None:
            self.G.add_edge(key_node, state_node, utility=utility, count=count)
        else:
            edge["utility"] += utility
            edge["count"] += count
        self.G.nodes[key_node]["count"] += count
        self._counts[self._key_rows[key_node]] += count

    def _append_key_row(self, key_node: tuple, encoded_key: EncodedKey) -> None:
        row = flatten(encoded_key)
        n = len(self._key_nodes)
        if n == len(self._counts):
            capacity = max(self._INITIAL_ROWS, 2 * n)
            vectors = np.zeros((capacity, row.size))
            if n:
                vectors[:n] = self._vectors[:n]
            self._vectors = vectors
            self._squared_norms = np.resize(self._squared_norms, capacity)
            self._counts = np.concatenate([self._counts, np.zeros(capacity - n, dtype=np.int64)])
        self._vectors[n] = row
        self._squared_norms[n] = float(np.dot(row, row))
        self._key_rows[key_node] = n
        self._key_nodes.append(key_node)

    # Reading

    def _transitions(self, key_node: tuple) -> List[TransitionRecord]:
        nodes = self.G.nodes
        return [
            TransitionRecord(nodes[state_node]["state"], data["utility"], data["count"])
            for state_node, data in self.G.succ[key_node].items()
        ]

    def lookup_exact(self, key: SequenceKey, sc: int = 2) -> Optional[Match]:
        """The key's transitions if it was experienced at least sc times"""
        encoded_key = key.encoded(self.encoding)
        key_node = ("key", encoded_key)
        if key_node not in self.G or self.G.nodes[key_node]["count"] < sc:
            return None
        return Match(encoded_key, 1.0, "exact", self._transitions(key_node))

    def similarities(self, encoded_key: EncodedKey) -> np.ndarray:
        """Cosine similarity of encoded_key against every stored key, in insertion order"""
        n = len(self._key_nodes)
        query = flatten(encoded_key)
        if n and query.size != self._vectors.shape[1]:
            raise ContractViolation(
                f"key of {query.size} components against stored keys of {self._vectors.shape[1]}")
        denom = np.sqrt(self._squared_norms[:n] * float(np.dot(query, query)))
        dots = self._vectors[:n] @ query if n else np.zeros(0)
        sims = np.divide(dots, denom, out=np.zeros(n), where=denom > 0)
        return np.clip(sims, -1.0, 1.0)

    def lookup_similar(self, key: SequenceKey, ss: float, sc: int = 2) -> Optional[Match]:
        """Transitions of the most similar key with at least sc experiences, if similarity >= ss.

        Linear scan; the first key in insertion order wins ties.
        """
        n = len(self._key_nodes)
        if n == 0:
            return None
        encoded_key = key.encoded(self.encoding)
        eligible = self._counts[:n] >= sc
        if not eligible.any():
            return None
        sims = np.where(eligible, self.similarities(encoded_key), -np.inf)
        best = int(np.argmax(sims))
        if sims[best] < ss:
            return None
        key_node = self._key_nodes[best]
        return Match(key_node[1], float(sims[best]), "similar", self._transitions(key_node))

    def entries(self) -> Iterator[Tuple[EncodedKey, int, List[Tuple[Vector, int, int]]]]:
        """(encoded key, key count, [(successor vector, U, C)]) in insertion order"""
        for key_node in self._key_nodes:
            transitions = [
                (state_node[1], data["utility"], data["count"])
                for state_node, data in self.G.succ[key_node].items()
            ]
            yield key_node[1], self.G.nodes[key_node]["count"], transitions

    # Persistence

    def to_document(self) -> GraphDocument:
        return GraphDocument(
            version=FORMAT_VERSION,
            encoding_config=EncodingSettings(
                sr=self.encoding.sr, ea=self.encoding.ea, n_features=self.encoding.n_features),
            entries=[
                KeyEntry(
                    key=[list(v) for v in encoded_key],
                    key_count=key_count,
                    transitions=[
                        TransitionEntry(successor=list(vector), utility=utility, count=count)
                        for vector, utility, count in transitions
                    ],
                )
                for encoded_key, key_count, transitions in self.entries()
            ],
        )

    @classmethod
    def from_document(cls, document: GraphDocument) -> 'TransitionGraph':
        if document.version != FORMAT_VERSION:
            raise GraphFormatError(
                f"model format version {document.version}, expected {FORMAT_VERSION}")
        settings = document.encoding_config
        graph = cls(EncodingConfig(sr=settings.sr, ea=settings.ea, n_features=settings.n_features))
        width = graph.encoding.width
        for index, entry in enumerate(document.entries):
            if not entry.key or not entry.transitions:
                raise GraphFormatError(f"entry {index} has an empty key or no transitions")
            if graph.context_size is not None and len(entry.key) != graph.context_size:
                raise GraphFormatError(
                    f"entry {index} key holds {len(entry.key)} states, expected {graph.context_size}")
            vectors = entry.key + [t.successor for t in entry.transitions]
            if any(len(v) != width for v in vectors):
                raise GraphFormatError(f"entry {index} has a state vector not of length {width}")
            if entry.key_count != sum(t.count for t in entry.transitions):
                raise GraphFormatError(
                    f"entry {index} key_count {entry.key_count} disagrees with its transitions")
            encoded_key = tuple(tuple(v) for v in entry.key)
            for t in entry.transitions:
                if t.count < 1:
                    raise GraphFormatError(f"entry {index} has a transition with count {t.count}")
                graph._add(encoded_key, tuple(t.successor), t.utility, t.count)
        return graph

    def save(self, path) -> None:
        Path(path).write_text(self.to_document().model_dump_json(), encoding="utf-8")
        logger.info(f"Saved model with {len(self)} keys and {self.transition_count} transitions to {path}")

    @classmethod
    def load(cls, path) -> 'TransitionGraph':
        text = Path(path).read_text(encoding="utf-8")
        try:
            document = GraphDocument.model_validate_json(text)
        except ValidationError as e:
            raise GraphFormatError(f"malformed model file {path}: {e.errors()[0]['msg']}") from e
        graph = cls.from_document(document)
        logger.info(f"Loaded model with {len(graph)} keys and {graph.transition_count} transitions from {path}")
        return graph

    # Export

    def prune(self, min_count: int) -> 'TransitionGraph':
        """Copy keeping only transitions with C >= min_count"""
        pruned = TransitionGraph(self.encoding)
        for encoded_key, _, transitions in self.entries():
            for vector, utility, count in transitions:
                if count >= min_count:
                    pruned._add(encoded_key, vector, utility, count)
        return pruned

    def export_dot(self, path, min_count: int = 1) -> int:
        """Write a DOT digraph of the transitions with C >= min_count; returns the edge count"""
        if min_count < 1:
            raise ContractViolation(f"min_count must be at least 1, got {min_count}")
        export = nx.DiGraph(name="transitions")
        names: Dict[tuple, str] = {}

        def node_name(node: tuple) -> str:
            if node not in names:
                names[node] = f"{'k' if node[0] == 'key' else 's'}{len(names)}"
                label = [list(v) for v in node[1]] if node[0] == "key" else list(node[1])
                export.add_node(names[node], label=str(label),
                                shape="box" if node[0] == "key" else "ellipse")
            return names[node]

        for key_node in self._key_nodes:
            for state_node, data in self.G.succ[key_node].items():
                if data["count"] >= min_count:
                    export.add_edge(node_name(key_node), node_name(state_node),
                                    label=f"U={data['utility']} C={data['count']}")

        text = nx.nx_pydot.to_pydot(export).to_string()
        try:
            with open(path, "w", encoding="utf-8") as f:
                f.write(text)
        except OSError as e:
            raise ExportError(f"cannot write DOT export to {path}: {e}") from e
        logger.info(f"Exported {export.number_of_edges()} transitions with C >= {min_count} to {path}")
        return export.number_of_edges()
