"""Word sense induction over substitute documents.

Each occurrence of an ambiguous word is represented by its top generated
substitutes (lemmatized, target excluded), treated as a bag-of-words
document.  Documents are embedded as L2-normalized TF-IDF vectors and
grouped with bottom-up average-linkage clustering under cosine distance;
the cluster count is chosen per word by maximizing the silhouette score.
The whole procedure is deterministic: merge ties break on the smallest
cluster-index pair and silhouette ties on the smallest k.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from lexsubkit.interchange import RankedSubstitutes, TargetedExample

#: Substitutes kept per occurrence when building documents.
DOCUMENT_SIZE = 200

#: Default candidate cluster counts: 2 .. min(8, N-1).
DEFAULT_MAX_K = 8


@dataclass(frozen=True)
class WsiInstance:
    """One occurrence of a target word, optionally with a gold sense."""

    id: str
    lemma: str
    pos: str
    example: TargetedExample
    gold_sense: str | None = None
    gold_graded: Mapping[str, float] | None = None

    def __post_init__(self):
        if self.gold_graded:
            # hard label = highest weight, lexicographic tie-break
            projected = min(
                self.gold_graded, key=lambda s: (-self.gold_graded[s], s)
            )
            if self.gold_sense is None:
                object.__setattr__(self, "gold_sense", projected)
            elif self.gold_sense != projected:
                raise ValueError(
                    f"{self.id}: gold sense {self.gold_sense!r} is not the "
                    f"argmax of the graded labels"
                )


@dataclass(frozen=True)
class SubstituteDocument:
    instance_id: str
    lemmas: tuple[str, ...]

    def __post_init__(self):
        if len(self.lemmas) > DOCUMENT_SIZE:
            raise ValueError(
                f"{self.instance_id}: document exceeds {DOCUMENT_SIZE} lemmas"
            )


@dataclass(frozen=True)
class Clustering:
    """Dense cluster assignment for a set of instances."""

    assignment: Mapping[str, int]
    k: int

    def __post_init__(self):
        labels = set(self.assignment.values())
        if labels != set(range(self.k)):
            raise ValueError(f"cluster ids must be dense 0..{self.k - 1}")


def build_documents(
    instances: Sequence[WsiInstance],
    ranker: Callable[[TargetedExample], RankedSubstitutes],
    size: int = DOCUMENT_SIZE,
) -> list[SubstituteDocument]:
    """Top ``size`` substitute lemmas per instance, in rank order."""
    return [
        SubstituteDocument(inst.id, tuple(ranker(inst.example).top(size)))
        for inst in instances
    ]


def tfidf(documents: Sequence[SubstituteDocument]) -> tuple[np.ndarray, list[str]]:
    """L2-normalized TF-IDF vectors for substitute documents.

    tf is the raw in-document count; idf = ln((1 + N) / (1 + df)) + 1.
    Returns the matrix and the feature lemmas (sorted, one per column).
    """
    if len(documents) < 2:
        raise ValueError("need at least two documents")
    if all(not d.lemmas for d in documents):
        raise ValueError("all documents are empty")
    features = sorted({lemma for d in documents for lemma in d.lemmas})
    column = {lemma: j for j, lemma in enumerate(features)}
    n = len(documents)
    df = Counter()
    for d in documents:
        df.update(set(d.lemmas))
    idf = np.array(
        [math.log((1 + n) / (1 + df[lemma])) + 1.0 for lemma in features]
    )
    matrix = np.zeros((n, len(features)))
    for i, d in enumerate(documents):
        for lemma, count in Counter(d.lemmas).items():
            matrix[i, column[lemma]] = count
    matrix *= idf
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    np.divide(matrix, norms, out=matrix, where=norms > 0)
    return matrix, features


def cosine_distances(vectors: np.ndarray) -> np.ndarray:
    """Pairwise 1 - cosine similarity; zero vectors are at distance 1."""
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    unit = np.divide(vectors, norms, out=np.zeros_like(vectors), where=norms > 0)
    sims = unit @ unit.T
    d = 1.0 - np.clip(sims, -1.0, 1.0)
    np.fill_diagonal(d, 0.0)
    return d


def agglomerative_cluster(
    vectors: np.ndarray, k: int, ids: Sequence[str] | None = None
) -> Clustering:
    """Bottom-up average-linkage clustering under cosine distance.

    At every step the pair of clusters with the smallest average pairwise
    distance is merged; exact ties break on the smallest (i, j) cluster
    indices, where indices count creation order (initial points first).
    """
    n = len(vectors)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    if ids is None:
        ids = [str(i) for i in range(n)]
    base = cosine_distances(np.asarray(vectors, dtype=np.float64))

    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    dist: dict[tuple[int, int], float] = {
        (i, j): base[i, j] for i in range(n) for j in range(i + 1, n)
    }
    next_id = n
    while len(members) > k:
        (i, j) = min(dist, key=lambda pair: (dist[pair], pair))
        d_ij = dist.pop((i, j))
        size_i, size_j = len(members[i]), len(members[j])
        merged = members.pop(i) + members.pop(j)
        # Lance-Williams update for unweighted average linkage.
        new_dist: dict[tuple[int, int], float] = {}
        for m in members:
            a, b = (min(i, m), max(i, m)), (min(j, m), max(j, m))
            d_new = (size_i * dist.pop(a) + size_j * dist.pop(b)) / (size_i + size_j)
            new_dist[(m, next_id)] = d_new
        members[next_id] = merged
        dist.update(new_dist)
        next_id += 1

    # Dense labels in order of first point index, for determinism.
    clusters = sorted(members.values(), key=min)
    assignment: dict[str, int] = {}
    for label, cluster in enumerate(clusters):
        for point in cluster:
            assignment[ids[point]] = label
    return Clustering(assignment=assignment, k=len(clusters))


def silhouette_score(distances: np.ndarray, labels: Sequence[int]) -> float:
    """Mean per-sample silhouette under a precomputed distance matrix.

    Samples in singleton clusters score 0.  Requires at least 2 clusters.
    """
    labels = np.asarray(labels)
    unique = np.unique(labels)
    if len(unique) < 2:
        raise ValueError("silhouette needs at least two clusters")
    n = len(labels)
    scores = np.zeros(n)
    for i in range(n):
        own = labels[i]
        same = (labels == own) & (np.arange(n) != i)
        if not same.any():
            continue  # singleton
        a = distances[i, same].mean()
        b = min(
            distances[i, labels == other].mean() for other in unique if other != own
        )
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0 else (b - a) / denom
    return float(scores.mean())


@dataclass(frozen=True)
class ModelSelection:
    k: int
    clustering: Clustering
    silhouette_by_k: Mapping[int, float] = field(default_factory=dict)
    degenerate: bool = False


def select_k(
    vectors: np.ndarray,
    k_range: Sequence[int] | None = None,
    ids: Sequence[str] | None = None,
) -> ModelSelection:
    """Pick the cluster count maximizing the silhouette score.

    Ties resolve to the smallest k.  Fewer than 3 points, or a set of
    identical vectors, cannot support the criterion and collapse to a
    single flagged cluster.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    n = len(vectors)
    if ids is None:
        ids = [str(i) for i in range(n)]
    distances = cosine_distances(vectors)
    if n < 3 or np.all(distances == 0):
        assignment = {ids[i]: 0 for i in range(n)}
        return ModelSelection(
            k=1, clustering=Clustering(assignment, 1), degenerate=True
        )
    if k_range is None:
        k_range = range(2, min(DEFAULT_MAX_K, n - 1) + 1)
    k_range = [k for k in k_range if 2 <= k <= n - 1]
    if not k_range:
        raise ValueError("empty candidate range for k")

    best: tuple[float, int] | None = None
    by_k: dict[int, float] = {}
    clusterings: dict[int, Clustering] = {}
    for k in sorted(k_range):
        clustering = agglomerative_cluster(vectors, k, ids=ids)
        labels = [clustering.assignment[ids[i]] for i in range(n)]
        score = silhouette_score(distances, labels)
        by_k[k] = score
        clusterings[k] = clustering
        if best is None or score > best[0]:
            best = (score, k)
    _, chosen = best
    return ModelSelection(
        k=chosen, clustering=clusterings[chosen], silhouette_by_k=by_k
    )


# ---------------------------------------------------------------------------
# Clustering quality metrics
# ---------------------------------------------------------------------------


def _entropy(counts: Sequence[int], total: int) -> float:
    return -sum(c / total * math.log(c / total) for c in counts if c)


def _contingency(
    system: Sequence[int], gold: Sequence[str]
) -> tuple[Counter, Counter, Counter]:
    joint = Counter(zip(system, gold))
    return joint, Counter(system), Counter(gold)


def v_measure(system: Sequence[int], gold: Sequence[str]) -> float:
    """Harmonic mean of entropy-based homogeneity and completeness."""
    n = len(gold)
    joint, by_cluster, by_sense = _contingency(system, gold)
    h_gold = _entropy(by_sense.values(), n)
    h_system = _entropy(by_cluster.values(), n)
    h_gold_given = -sum(
        c / n * math.log(c / by_cluster[cluster])
        for (cluster, _), c in joint.items()
    )
    h_system_given = -sum(
        c / n * math.log(c / by_sense[sense]) for (_, sense), c in joint.items()
    )
    homogeneity = 1.0 if h_gold == 0 else 1.0 - h_gold_given / h_gold
    completeness = 1.0 if h_system == 0 else 1.0 - h_system_given / h_system
    if homogeneity + completeness == 0:
        return 0.0
    return 2 * homogeneity * completeness / (homogeneity + completeness)


def normalized_mutual_information(
    system: Sequence[int], gold: Sequence[str]
) -> float:
    """Mutual information normalized by the arithmetic mean of entropies."""
    n = len(gold)
    joint, by_cluster, by_sense = _contingency(system, gold)
    h_system = _entropy(by_cluster.values(), n)
    h_gold = _entropy(by_sense.values(), n)
    if h_system == 0 and h_gold == 0:
        return 1.0
    if h_system == 0 or h_gold == 0:
        return 0.0
    mi = sum(
        c / n * math.log(c * n / (by_cluster[cluster] * by_sense[sense]))
        for (cluster, sense), c in joint.items()
    )
    return mi / ((h_system + h_gold) / 2)


def paired_f_score(system: Sequence[int], gold: Sequence[str]) -> float:
    """F1 over unordered instance pairs placed in the same cluster."""
    n = len(gold)
    same_system = same_gold = both = 0
    for i in range(n):
        for j in range(i + 1, n):
            s = system[i] == system[j]
            g = gold[i] == gold[j]
            same_system += s
            same_gold += g
            both += s and g
    if same_system == 0 or same_gold == 0:
        return 0.0
    precision = both / same_system
    recall = both / same_gold
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def bcubed_f_score(system: Sequence[int], gold: Sequence[str]) -> float:
    """Harmonic mean of per-instance B-Cubed precision and recall."""
    n = len(gold)
    precision = recall = 0.0
    for i in range(n):
        cluster = [j for j in range(n) if system[j] == system[i]]
        sense = [j for j in range(n) if gold[j] == gold[i]]
        overlap = sum(1 for j in cluster if gold[j] == gold[i])
        precision += overlap / len(cluster)
        recall += overlap / len(sense)
    precision /= n
    recall /= n
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


#: Which metric pair the aggregate geometric mean combines, per benchmark
#: convention: the 2010 sets pair V-Measure with the paired F-Score, the
#: 2013 sets pair NMI with B-Cubed.
AVG_PAIRS = {
    "semeval2010": ("v_measure", "paired_f"),
    "semeval2013": ("nmi", "bcubed_f"),
}


def wsi_metrics(
    clustering: Clustering,
    gold: Mapping[str, str],
    avg_of: tuple[str, str] = AVG_PAIRS["semeval2010"],
) -> dict[str, float]:
    """All clustering metrics plus the geometric-mean aggregate."""
    missing = [i for i in clustering.assignment if i not in gold]
    if missing:
        raise ValueError(f"unlabeled instances: {sorted(missing)[:5]}")
    instance_ids = sorted(clustering.assignment)
    system = [clustering.assignment[i] for i in instance_ids]
    labels = [gold[i] for i in instance_ids]
    metrics = {
        "v_measure": v_measure(system, labels),
        "paired_f": paired_f_score(system, labels),
        "bcubed_f": bcubed_f_score(system, labels),
        "nmi": normalized_mutual_information(system, labels),
    }
    metrics["avg"] = math.sqrt(metrics[avg_of[0]] * metrics[avg_of[1]])
    return metrics
