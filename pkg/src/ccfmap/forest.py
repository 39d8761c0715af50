"""Canonical correlation forest training, prediction, and serialization.

Trees split on thresholds of CCA-derived projections computed per node from
a with-replacement resample ("projection bootstrap"); the threshold itself
is chosen on the original node rows.  There is no bagging: every tree sees
all training rows, and randomness enters only through feature subsampling
and the per-node bootstrap.  An axis_aligned mode provides the classical
baseline for comparisons.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .cca import canonical_correlation, default_gamma, one_hot
from .errors import DegenerateInputError, ParseError, UnsupportedVersionError

FORMAT_VERSION = 1
_MAGIC_PREFIX = "ccf-forest-v"


@dataclass(frozen=True)
class ForestParams:
    n_classes: int
    n_trees: int = 10
    feature_subsample: int | None = None  # None -> ceil(sqrt(d)) at fit time
    min_node_size: int = 2
    max_depth: int | None = None
    impurity: str = "gini"
    mode: str = "ccf"
    gamma: float | None = None  # None -> data-scaled default per node
    seed: int = 0

    def validate(self, n_features=None):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.n_classes < 2:
            raise ValueError("n_classes must be >= 2")
        if self.min_node_size < 1:
            raise ValueError("min_node_size must be >= 1")
        if self.impurity not in ("gini", "entropy"):
            raise ValueError(f"unknown impurity '{self.impurity}'")
        if self.mode not in ("ccf", "axis_aligned"):
            raise ValueError(f"unknown mode '{self.mode}'")
        if self.feature_subsample is not None:
            if self.feature_subsample < 1:
                raise ValueError("feature_subsample must be >= 1")
            if n_features is not None and self.feature_subsample > n_features:
                raise ValueError("feature_subsample exceeds feature count")


@dataclass(frozen=True)
class Leaf:
    class_distribution: np.ndarray  # (n_classes,), sums to 1


@dataclass(frozen=True)
class Internal:
    feature_indices: np.ndarray  # (lambda,) column indices
    projection: np.ndarray       # (lambda,) unit-norm direction
    threshold: float
    left: "Leaf | Internal"
    right: "Leaf | Internal"


@dataclass(frozen=True)
class Forest:
    params: ForestParams
    trees: tuple
    n_features: int
    class_names: tuple
    format_version: int = FORMAT_VERSION


def _impurity(counts, total, kind):
    """Gini or entropy impurity of a class-count vector."""
    p = counts / total
    if kind == "gini":
        return 1.0 - float(np.sum(p * p))
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def best_split(projected, labels, impurity, n_classes):
    """Exhaustive split search over every column of `projected`.

    Thresholds are midpoints between consecutive distinct sorted values.
    Returns (dim, threshold, gain); ties go to the lower dim, then the lower
    threshold.  Gain 0 means no usable split exists.
    """
    projected = np.asarray(projected, dtype=float)
    if projected.ndim == 1:
        projected = projected[:, None]
    n = projected.shape[0]
    counts = np.bincount(labels, minlength=n_classes).astype(float)
    parent = _impurity(counts, n, impurity)

    best = (0, 0.0, 0.0)
    for dim in range(projected.shape[1]):
        vals = projected[:, dim]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        sl = labels[order]
        cum = np.cumsum(one_hot(sl, n_classes), axis=0)
        boundaries = np.nonzero(sv[:-1] < sv[1:])[0]
        for i in boundaries:
            nl = i + 1
            nr = n - nl
            left_counts = cum[i]
            right_counts = counts - left_counts
            gain = parent - (nl / n) * _impurity(left_counts, nl, impurity) \
                - (nr / n) * _impurity(right_counts, nr, impurity)
            if gain > best[2]:
                best = (dim, float((sv[i] + sv[i + 1]) / 2.0), float(gain))
    return best


def _leaf(labels, n_classes):
    counts = np.bincount(labels, minlength=n_classes).astype(float)
    return Leaf(counts / counts.sum())


def _unit_columns(mat):
    """Scale columns to unit Euclidean norm; zero columns left untouched."""
    norms = np.linalg.norm(mat, axis=0)
    norms[norms == 0] = 1.0
    return mat / norms


def _try_oblique(x_node, labels, feat, params, rng):
    """One projection-bootstrap attempt; returns (projection, threshold, gain) or None."""
    n = x_node.shape[0]
    boot = rng.integers(0, n, size=n)
    xb = x_node[boot][:, feat]
    yb = one_hot(labels[boot], params.n_classes)
    gamma = params.gamma if params.gamma is not None else default_gamma(xb)
    try:
        res = canonical_correlation(xb, yb, gamma)
    except DegenerateInputError:
        return None
    dirs = _unit_columns(res.projections_x)
    projected = x_node[:, feat] @ dirs
    dim, thr, gain = best_split(projected, labels, params.impurity, params.n_classes)
    if gain <= 0.0:
        return None
    return dirs[:, dim].copy(), thr, gain


def _axis_split(x_node, labels, feat, params):
    """Best axis-aligned split over the sampled features, as a projection."""
    dim, thr, gain = best_split(x_node[:, feat], labels, params.impurity,
                                params.n_classes)
    if gain <= 0.0:
        return None
    proj = np.zeros(len(feat))
    proj[dim] = 1.0
    return proj, thr, gain


def _build_node(x, y, idx, depth, params, rng):
    labels = y[idx]
    if (np.all(labels == labels[0])
            or idx.shape[0] < params.min_node_size
            or (params.max_depth is not None and depth >= params.max_depth)):
        return _leaf(labels, params.n_classes)

    d = x.shape[1]
    lam = params.feature_subsample
    feat = np.sort(rng.choice(d, size=lam, replace=False))
    x_node = x[idx]

    found = None
    if params.mode == "ccf":
        for _ in range(2):  # retry once with a fresh bootstrap
            found = _try_oblique(x_node, labels, feat, params, rng)
            if found is not None:
                break
    if found is None:
        found = _axis_split(x_node, labels, feat, params)
    if found is None:
        return _leaf(labels, params.n_classes)

    proj, thr, _ = found
    values = x_node[:, feat] @ proj
    go_left = values <= thr
    if not go_left.any() or go_left.all():
        return _leaf(labels, params.n_classes)
    return Internal(
        feature_indices=feat,
        projection=proj,
        threshold=thr,
        left=_build_node(x, y, idx[go_left], depth + 1, params, rng),
        right=_build_node(x, y, idx[~go_left], depth + 1, params, rng),
    )


def train_tree(x, y, params, rng):
    """Grow a single tree over all rows of (x, y) using `rng`."""
    idx = np.arange(x.shape[0])
    return _build_node(x, y, idx, 0, params, rng)


def _samples_to_arrays(samples):
    feats = [np.asarray(s.features, dtype=float) for s in samples]
    lengths = {f.shape[0] for f in feats}
    if len(lengths) != 1:
        raise ValueError(f"inconsistent feature lengths: {sorted(lengths)}")
    x = np.vstack(feats)
    y = np.array([int(s.label) for s in samples], dtype=int)
    return x, y


def train_forest(samples, params, class_names=None, n_jobs=1):
    """Train a forest; a pure, order-independent function of (samples, params).

    Each tree gets an independent random stream derived from (seed, tree
    index), so serial and concurrent training produce identical forests.
    `samples` is a sequence of objects with .features and integer .label.
    """
    if len(samples) < 2:
        raise ValueError("need at least 2 samples")
    x, y = _samples_to_arrays(samples)
    if np.unique(y).shape[0] < 2:
        raise ValueError("need at least 2 distinct classes in the training data")
    if y.max() >= params.n_classes:
        raise ValueError(f"label {y.max()} out of range for n_classes={params.n_classes}")
    params.validate(n_features=x.shape[1])

    d = x.shape[1]
    if params.feature_subsample is None:
        params = replace(params, feature_subsample=math.ceil(math.sqrt(d)))
    if class_names is None:
        class_names = tuple(f"class_{i}" for i in range(params.n_classes))
    class_names = tuple(str(c) for c in class_names)
    if len(class_names) != params.n_classes:
        raise ValueError("class_names length must equal n_classes")

    streams = np.random.SeedSequence(params.seed).spawn(params.n_trees)

    def fit(ss):
        return train_tree(x, y, params, np.random.Generator(np.random.PCG64(ss)))

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = tuple(pool.map(fit, streams))
    else:
        trees = tuple(fit(ss) for ss in streams)
    return Forest(params=params, trees=trees, n_features=d,
                  class_names=class_names)


def _check_features(forest, features):
    features = np.asarray(features, dtype=float)
    if features.shape != (forest.n_features,):
        raise ValueError(
            f"expected {forest.n_features} features, got shape {features.shape}")
    if not np.all(np.isfinite(features)):
        raise ValueError("features must be finite")
    return features


def predict_proba(forest, features):
    """Mean of leaf class distributions across trees; sums to 1."""
    features = _check_features(forest, features)
    total = np.zeros(forest.params.n_classes)
    for tree in forest.trees:
        node = tree
        while isinstance(node, Internal):
            v = features[node.feature_indices] @ node.projection
            node = node.left if v <= node.threshold else node.right
        total += node.class_distribution
    return total / len(forest.trees)


def predict_class(forest, features):
    """Argmax of predict_proba; ties break toward the lowest class index."""
    return int(np.argmax(predict_proba(forest, features)))


def predict_proba_batch(forest, x):
    """Vectorized predict_proba over the rows of x (n, d)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != forest.n_features:
        raise ValueError(f"expected (n, {forest.n_features}) array, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    out = np.zeros((x.shape[0], forest.params.n_classes))

    def descend(node, rows):
        if isinstance(node, Leaf):
            out[rows] += node.class_distribution
            return
        v = x[rows][:, node.feature_indices] @ node.projection
        go_left = v <= node.threshold
        if go_left.any():
            descend(node.left, rows[go_left])
        if not go_left.all():
            descend(node.right, rows[~go_left])

    all_rows = np.arange(x.shape[0])
    for tree in forest.trees:
        descend(tree, all_rows)
    return out / len(forest.trees)


def predict_class_batch(forest, x):
    return np.argmax(predict_proba_batch(forest, x), axis=1)


# ---------------------------------------------------------------------------
# Serialization: a versioned, human-inspectable text document (.ccf).
# Floats are written with repr() so round trips are byte-identical.


def _fmt_floats(values):
    return ",".join(repr(float(v)) for v in values)


def _fmt_ints(values):
    return ",".join(str(int(v)) for v in values)


def _write_node(node, depth, lines):
    pad = "  " * (depth + 1)
    if isinstance(node, Leaf):
        lines.append(f"{pad}leaf dist={_fmt_floats(node.class_distribution)}")
    else:
        lines.append(
            f"{pad}internal features={_fmt_ints(node.feature_indices)}"
            f" projection={_fmt_floats(node.projection)}"
            f" threshold={repr(float(node.threshold))}")
        _write_node(node.left, depth + 1, lines)
        _write_node(node.right, depth + 1, lines)


def serialize(forest):
    """Encode a forest as UTF-8 text; see deserialize for the inverse."""
    p = forest.params
    lines = [
        f"{_MAGIC_PREFIX}{forest.format_version}",
        f"n_features {forest.n_features}",
        f"n_classes {p.n_classes}",
        f"class_names {','.join(forest.class_names)}",
        f"n_trees {p.n_trees}",
        f"feature_subsample {p.feature_subsample}",
        f"min_node_size {p.min_node_size}",
        f"max_depth {'none' if p.max_depth is None else p.max_depth}",
        f"impurity {p.impurity}",
        f"mode {p.mode}",
        f"gamma {'default' if p.gamma is None else repr(float(p.gamma))}",
        f"seed {p.seed}",
    ]
    for i, tree in enumerate(forest.trees):
        lines.append(f"tree {i}")
        _write_node(tree, 0, lines)
    lines.append("end")
    return ("\n".join(lines) + "\n").encode("utf-8")


class _LineReader:
    def __init__(self, text):
        self.lines = text.split("\n")
        self.pos = 0

    @property
    def lineno(self):
        return self.pos  # 1-based number of the line just read

    def next(self):
        if self.pos >= len(self.lines):
            raise ParseError("unexpected end of document", line=self.pos)
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def peek(self):
        if self.pos >= len(self.lines):
            return None
        return self.lines[self.pos]


def _parse_kv(line, key, lineno):
    prefix = key + " "
    if not line.startswith(prefix):
        raise ParseError(f"expected '{key} ...'", line=lineno, field=key)
    return line[len(prefix):]


def _parse_floats(text, lineno, field):
    try:
        return np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError:
        raise ParseError("bad float list", line=lineno, field=field) from None


def _parse_node(reader, depth, n_classes, n_features):
    line = reader.next()
    lineno = reader.lineno
    pad = "  " * (depth + 1)
    if not line.startswith(pad) or line[len(pad):len(pad) + 1] == " ":
        raise ParseError("bad node indentation", line=lineno)
    body = line[len(pad):]
    if body.startswith("leaf "):
        if not body.startswith("leaf dist="):
            raise ParseError("leaf line must carry dist=", line=lineno, field="dist")
        dist = _parse_floats(body[len("leaf dist="):], lineno, "dist")
        if dist.shape[0] != n_classes:
            raise ParseError(f"leaf distribution has {dist.shape[0]} entries, "
                             f"expected {n_classes}", line=lineno, field="dist")
        return Leaf(dist)
    if body.startswith("internal "):
        fields = {}
        for token in body[len("internal "):].split(" "):
            if "=" not in token:
                raise ParseError(f"bad token '{token}'", line=lineno)
            key, val = token.split("=", 1)
            fields[key] = val
        for key in ("features", "projection", "threshold"):
            if key not in fields:
                raise ParseError("missing internal-node field", line=lineno, field=key)
        try:
            feat = np.array([int(v) for v in fields["features"].split(",")], dtype=int)
        except ValueError:
            raise ParseError("bad feature index list", line=lineno,
                             field="features") from None
        if feat.size == 0 or feat.min() < 0 or feat.max() >= n_features:
            raise ParseError("feature index out of range", line=lineno,
                             field="features")
        proj = _parse_floats(fields["projection"], lineno, "projection")
        if proj.shape[0] != feat.shape[0]:
            raise ParseError("projection length != feature count", line=lineno,
                             field="projection")
        try:
            thr = float(fields["threshold"])
        except ValueError:
            raise ParseError("bad threshold", line=lineno, field="threshold") from None
        left = _parse_node(reader, depth + 1, n_classes, n_features)
        right = _parse_node(reader, depth + 1, n_classes, n_features)
        return Internal(feat, proj, thr, left, right)
    raise ParseError(f"unknown node kind in '{body.strip()}'", line=lineno)


def _parse_int(text, lineno, field):
    try:
        return int(text)
    except ValueError:
        raise ParseError("expected an integer", line=lineno, field=field) from None


def deserialize(data):
    """Decode the output of serialize; rejects unknown format versions."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not valid UTF-8: {exc}") from None
    reader = _LineReader(text)

    magic = reader.next()
    if not magic.startswith(_MAGIC_PREFIX):
        raise ParseError(f"not a ccf model document (got '{magic[:40]}')", line=1)
    version = _parse_int(magic[len(_MAGIC_PREFIX):], 1, "version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"model format version {version} is not supported "
            f"(this build reads version {FORMAT_VERSION})")

    def kv(key):
        line = reader.next()
        return _parse_kv(line, key, reader.lineno)

    n_features = _parse_int(kv("n_features"), reader.lineno, "n_features")
    n_classes = _parse_int(kv("n_classes"), reader.lineno, "n_classes")
    class_names = tuple(kv("class_names").split(","))
    n_trees = _parse_int(kv("n_trees"), reader.lineno, "n_trees")
    feature_subsample = _parse_int(kv("feature_subsample"), reader.lineno,
                                   "feature_subsample")
    min_node_size = _parse_int(kv("min_node_size"), reader.lineno, "min_node_size")
    max_depth_raw = kv("max_depth")
    max_depth = None if max_depth_raw == "none" else _parse_int(
        max_depth_raw, reader.lineno, "max_depth")
    impurity = kv("impurity")
    mode = kv("mode")
    gamma_raw = kv("gamma")
    if gamma_raw == "default":
        gamma = None
    else:
        try:
            gamma = float(gamma_raw)
        except ValueError:
            raise ParseError("bad gamma", line=reader.lineno, field="gamma") from None
    seed = _parse_int(kv("seed"), reader.lineno, "seed")

    params = ForestParams(n_classes=n_classes, n_trees=n_trees,
                          feature_subsample=feature_subsample,
                          min_node_size=min_node_size, max_depth=max_depth,
                          impurity=impurity, mode=mode, gamma=gamma, seed=seed)
    try:
        params.validate(n_features=n_features)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    if len(class_names) != n_classes:
        raise ParseError("class_names length != n_classes", field="class_names")

    trees = []
    for i in range(n_trees):
        line = reader.next()
        if line != f"tree {i}":
            raise ParseError(f"expected 'tree {i}'", line=reader.lineno)
        trees.append(_parse_node(reader, 0, n_classes, n_features))
    line = reader.next()
    if line != "end":
        raise ParseError("expected 'end'", line=reader.lineno)
    return Forest(params=params, trees=tuple(trees), n_features=n_features,
                  class_names=class_names, format_version=version)
