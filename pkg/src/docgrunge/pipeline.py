"""Three-phase augmentation pipelines with per-run provenance.

A pipeline is three node sequences.  The ink phase runs on the document
image, the paper phase runs on a fresh sheet (white, unless a paper texture
node replaces it), the two are merged by multiplicative printing, and the
post phase runs on the merged page.

Every node is gated: it applies iff ``u < p`` for one uniform draw ``u``
from the node's own substream, keyed by (seed, phase, node index).  Because
streams never interleave, toggling one node's probability or parameters
cannot shift what any other node samples.  Each run produces a log with one
entry per node (including the unchosen members of one-of groups), carrying
the resolved parameters of everything that fired.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Mapping

import numpy as np

from .effects import catalog, get_effect, resolve_params, validate_params
from .errors import EffectError, ParamError, SpecError
from .raster import Raster, quantize, resample, to_rgb
from .rng import Substream, derive_key

SPEC_VERSION = 1
EXTERNAL_KIND = "external"

_PHASE_IDS = {"ink": 1, "paper": 2, "post": 3}
PHASE_NAMES = ("ink", "paper", "post")


@dataclass(frozen=True)
class EffectNode:
    """One gated effect: a catalog kind (or external callable) plus params."""

    kind: str
    p: float = 1.0
    params: Mapping = field(default_factory=dict)
    fn: Callable[[Raster], Raster] | None = None  # external transforms only

    @property
    def is_external(self) -> bool:
        return self.kind == EXTERNAL_KIND


@dataclass(frozen=True)
class OneOf:
    """A gated group: when the gate fires, exactly one member applies.

    The member is chosen uniformly; member probabilities are ignored.
    """

    members: tuple[EffectNode, ...]
    p: float = 1.0


Node = EffectNode | OneOf


@dataclass(frozen=True)
class AugmentationResult:
    """What one node did during a run."""

    phase: str
    index: int
    kind: str
    applied: bool
    p: float
    params: dict
    duration_ms: float
    input_dims: tuple[int, int, int]
    output_dims: tuple[int, int, int]
    member_index: int | None = None
    selected: bool | None = None
    intermediate: Raster | None = None


@dataclass(frozen=True)
class PipelineOutput:
    """Everything a run produced: final page, layers, and the node log."""

    output: Raster
    log: dict[str, list[AugmentationResult]]
    ink_layer: Raster
    paper_layer: Raster
    merged: Raster
    seed: int

    def entries(self) -> Iterator[AugmentationResult]:
        for phase in PHASE_NAMES:
            yield from self.log.get(phase, [])


@dataclass(frozen=True)
class PipelineSpec:
    """An immutable pipeline description; validate before running."""

    ink: tuple[Node, ...] = ()
    paper: tuple[Node, ...] = ()
    post: tuple[Node, ...] = ()
    seed: int = 0
    texture_dir: str | None = None
    save_intermediates: bool = False

    def phases(self) -> dict[str, tuple[Node, ...]]:
        return {"ink": self.ink, "paper": self.paper, "post": self.post}

    def node_count(self) -> int:
        """Log entries a run will emit; one-of members count individually."""
        total = 0
        for nodes in self.phases().values():
            for node in nodes:
                total += len(node.members) if isinstance(node, OneOf) else 1
        return total

    # -- validation ---------------------------------------------------------

    def _validate_effect(self, node: EffectNode, pointer: str) -> None:
        if not isinstance(node.p, (int, float)) or isinstance(node.p, bool) or not 0.0 <= node.p <= 1.0:
            raise SpecError(f"p must be in [0, 1], got {node.p!r}", f"{pointer}/p")
        if node.is_external:
            if node.fn is None:
                raise SpecError("external node is missing its callable", f"{pointer}/kind")
            return
        if node.fn is not None:
            raise SpecError(
                f"only '{EXTERNAL_KIND}' nodes may carry a callable", f"{pointer}/kind"
            )
        try:
            get_effect(node.kind)
        except ParamError:
            raise SpecError(f"unknown effect kind '{node.kind}'", f"{pointer}/kind") from None
        try:
            validate_params(node.kind, dict(node.params))
        except ParamError as exc:
            raise SpecError(str(exc), f"{pointer}/params") from None

    def validate(self) -> None:
        needs_textures = False
        for phase, nodes in self.phases().items():
            for i, node in enumerate(nodes):
                pointer = f"/{phase}/{i}"
                if isinstance(node, OneOf):
                    if not node.members:
                        raise SpecError("one_of group has no members", f"{pointer}/one_of")
                    if not isinstance(node.p, (int, float)) or isinstance(node.p, bool) or not 0.0 <= node.p <= 1.0:
                        raise SpecError(f"p must be in [0, 1], got {node.p!r}", f"{pointer}/p")
                    for m, member in enumerate(node.members):
                        self._validate_effect(member, f"{pointer}/one_of/{m}")
                        if member.kind == "paper_factory":
                            needs_textures = needs_textures or not member.params.get("texture_dir")
                else:
                    self._validate_effect(node, pointer)
                    if node.kind == "paper_factory":
                        needs_textures = needs_textures or not node.params.get("texture_dir")
        if needs_textures and not self.texture_dir:
            raise SpecError("paper_factory requires texture_dir", "/texture_dir")

    # -- JSON ---------------------------------------------------------------

    def to_json(self, indent: int | None = 2) -> str:
        def node_obj(node: Node, pointer: str):
            if isinstance(node, OneOf):
                return {
                    "one_of": [
                        node_obj(m, f"{pointer}/one_of/{i}") for i, m in enumerate(node.members)
                    ],
                    "p": node.p,
                }
            if node.is_external:
                raise SpecError("external nodes cannot be serialized", f"{pointer}/kind")
            params = validate_params(node.kind, dict(node.params))
            return {"kind": node.kind, "p": node.p, "params": _jsonable(params)}

        doc = {
            "spec_version": SPEC_VERSION,
            "seed": self.seed,
            "texture_dir": self.texture_dir,
            "save_intermediates": self.save_intermediates,
        }
        for phase, nodes in self.phases().items():
            doc[phase] = [node_obj(n, f"/{phase}/{i}") for i, n in enumerate(nodes)]
        return json.dumps(doc, indent=indent)


def _jsonable(value):
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def _node_from_obj(obj, pointer: str) -> Node:
    if not isinstance(obj, dict):
        raise SpecError(f"node must be an object, got {type(obj).__name__}", pointer)
    if "one_of" in obj:
        extra = set(obj) - {"one_of", "p"}
        if extra:
            raise SpecError(f"unknown node keys {sorted(extra)}", pointer)
        members_obj = obj["one_of"]
        if not isinstance(members_obj, list):
            raise SpecError("one_of must be a list", f"{pointer}/one_of")
        members = []
        for i, m in enumerate(members_obj):
            member = _node_from_obj(m, f"{pointer}/one_of/{i}")
            if isinstance(member, OneOf):
                raise SpecError("one_of groups cannot nest", f"{pointer}/one_of/{i}")
            members.append(member)
        return OneOf(members=tuple(members), p=obj.get("p", 1.0))
    extra = set(obj) - {"kind", "p", "params"}
    if extra:
        raise SpecError(f"unknown node keys {sorted(extra)}", pointer)
    if "kind" not in obj:
        raise SpecError("node is missing 'kind'", pointer)
    params = obj.get("params", {})
    if not isinstance(params, dict):
        raise SpecError("params must be an object", f"{pointer}/params")
    return EffectNode(kind=obj["kind"], p=obj.get("p", 1.0), params=params)


def spec_from_json(text: str) -> PipelineSpec:
    """Parse and validate a pipeline spec document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON at byte offset {exc.pos}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise SpecError("spec must be a JSON object")
    version = doc.get("spec_version")
    if version != SPEC_VERSION:
        raise SpecError(f"unsupported spec_version {version!r}", "/spec_version")
    known = {"spec_version", "seed", "texture_dir", "save_intermediates", "ink", "paper", "post"}
    extra = set(doc) - known
    if extra:
        raise SpecError(f"unknown spec keys {sorted(extra)}")
    phases = {}
    for phase in PHASE_NAMES:
        nodes_obj = doc.get(phase, [])
        if not isinstance(nodes_obj, list):
            raise SpecError(f"phase must be a list", f"/{phase}")
        phases[phase] = tuple(
            _node_from_obj(o, f"/{phase}/{i}") for i, o in enumerate(nodes_obj)
        )
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise SpecError(f"seed must be an integer, got {seed!r}", "/seed")
    texture_dir = doc.get("texture_dir")
    if texture_dir is not None and not isinstance(texture_dir, str):
        raise SpecError("texture_dir must be a string or null", "/texture_dir")
    save = doc.get("save_intermediates", False)
    if not isinstance(save, bool):
        raise SpecError("save_intermediates must be a boolean", "/save_intermediates")
    spec = PipelineSpec(
        ink=phases["ink"],
        paper=phases["paper"],
        post=phases["post"],
        seed=seed,
        texture_dir=texture_dir,
        save_intermediates=save,
    )
    spec.validate()
    return spec


# -- running ------------------------------------------------------------------


def gate(p: float, rng: Substream) -> bool:
    """One uniform draw; True iff u < p.  p=0 never fires, p=1 always."""
    return rng.uniform() < p


def print_merge(ink_layer: Raster, paper_layer: Raster) -> Raster:
    """Print ink onto paper: per-channel multiply.

    The paper is resampled to the ink layer's size first and gray/RGB are
    promoted to a common channel count.  A white sheet is the identity.
    """
    if (paper_layer.width, paper_layer.height) != (ink_layer.width, ink_layer.height):
        paper_layer = resample(paper_layer, ink_layer.width, ink_layer.height)
    if paper_layer.channels != ink_layer.channels:
        ink_layer, paper_layer = to_rgb(ink_layer), to_rgb(paper_layer)
    product = ink_layer.array.astype(np.float64) * paper_layer.array.astype(np.float64) / 255.0
    return Raster(quantize(product))


def _inject_texture_dir(kind: str, params: dict, texture_dir: str | None) -> dict:
    if kind == "paper_factory" and not params.get("texture_dir") and texture_dir:
        params = dict(params)
        params["texture_dir"] = texture_dir
    return params


def _apply_effect(
    node: EffectNode,
    img: Raster,
    phase: str,
    index: int,
    node_key: int,
    applied: bool,
    texture_dir: str | None,
    save_intermediates: bool,
    member_index: int | None = None,
    selected: bool | None = None,
) -> tuple[Raster, AugmentationResult]:
    """Run (or skip) one effect and build its log entry."""
    if not applied:
        snapshot = dict(node.params) if node.is_external else _jsonable(
            validate_params(node.kind, dict(node.params))
        )
        return img, AugmentationResult(
            phase=phase,
            index=index,
            kind=node.kind,
            applied=False,
            p=node.p,
            params=snapshot,
            duration_ms=0.0,
            input_dims=img.dims,
            output_dims=img.dims,
            member_index=member_index,
            selected=selected,
        )
    key_offset = 0 if member_index is None else 3 + member_index
    params_rng = Substream(derive_key(node_key, key_offset, 1))
    apply_rng = Substream(derive_key(node_key, key_offset, 2))
    start = time.perf_counter()
    try:
        if node.is_external:
            resolved = dict(node.params)
            out = node.fn(img)
        else:
            canonical = validate_params(node.kind, dict(node.params))
            canonical = _inject_texture_dir(node.kind, canonical, texture_dir)
            resolved = resolve_params(node.kind, canonical, params_rng)
            out = get_effect(node.kind).fn(img, resolved, apply_rng)
    except Exception as exc:
        raise EffectError(phase, index, node.kind, exc) from exc
    if not isinstance(out, Raster):
        raise EffectError(
            phase, index, node.kind, TypeError(f"effect returned {type(out).__name__}")
        )
    duration_ms = (time.perf_counter() - start) * 1000.0
    return out, AugmentationResult(
        phase=phase,
        index=index,
        kind=node.kind,
        applied=True,
        p=node.p,
        params=_jsonable(resolved),
        duration_ms=duration_ms,
        input_dims=img.dims,
        output_dims=out.dims,
        member_index=member_index,
        selected=selected,
        intermediate=out if save_intermediates else None,
    )


def apply_sequence(
    phase: str,
    nodes: tuple[Node, ...],
    img: Raster,
    base_seed: int,
    texture_dir: str | None = None,
    save_intermediates: bool = False,
) -> tuple[Raster, list[AugmentationResult]]:
    """Run one phase; returns the final raster and one entry per node."""
    current = img
    results: list[AugmentationResult] = []
    phase_id = _PHASE_IDS[phase]
    for index, node in enumerate(nodes):
        node_key = derive_key(base_seed, phase_id, index)
        gate_rng = Substream(node_key)
        fired = gate(node.p, gate_rng)
        if isinstance(node, OneOf):
            # selection is drawn whether or not the gate fired so that
            # toggling p never shifts downstream draws of this group
            choice = gate_rng.choice(len(node.members))
            for m_idx, member in enumerate(node.members):
                is_chosen = fired and m_idx == choice
                out, entry = _apply_effect(
                    member,
                    current,
                    phase,
                    index,
                    node_key,
                    applied=is_chosen,
                    texture_dir=texture_dir,
                    save_intermediates=save_intermediates,
                    member_index=m_idx,
                    selected=is_chosen,
                )
                # group gate probability is what was evaluated, record it
                entry = replace(entry, p=node.p)
                results.append(entry)
                if is_chosen:
                    current = out
        else:
            current, entry = _apply_effect(
                node,
                current,
                phase,
                index,
                node_key,
                applied=fired,
                texture_dir=texture_dir,
                save_intermediates=save_intermediates,
            )
            results.append(entry)
    return current, results


def one_of(
    members: tuple[EffectNode, ...],
    p: float,
    img: Raster,
    phase: str,
    index: int,
    base_seed: int,
) -> tuple[Raster, AugmentationResult]:
    """Standalone one-of evaluation; returns the chosen member's entry
    (or a skip entry for the first member when the gate does not fire)."""
    out, entries = apply_sequence(phase, (OneOf(members=members, p=p),), img, base_seed)
    chosen = next((e for e in entries if e.applied), entries[0])
    return out, chosen


def run(spec: PipelineSpec, img: Raster, seed: int | None = None) -> PipelineOutput:
    """Execute ink -> paper -> print -> post and log every node once."""
    spec.validate()
    base_seed = spec.seed if seed is None else seed
    ink_layer, ink_log = apply_sequence(
        "ink", spec.ink, img, base_seed, spec.texture_dir, spec.save_intermediates
    )
    sheet = Raster.blank(img.width, img.height, img.channels, 255)
    paper_layer, paper_log = apply_sequence(
        "paper", spec.paper, sheet, base_seed, spec.texture_dir, spec.save_intermediates
    )
    merged = print_merge(ink_layer, paper_layer)
    output, post_log = apply_sequence(
        "post", spec.post, merged, base_seed, spec.texture_dir, spec.save_intermediates
    )
    return PipelineOutput(
        output=output,
        log={"ink": ink_log, "paper": paper_log, "post": post_log},
        ink_layer=ink_layer,
        paper_layer=paper_layer,
        merged=merged,
        seed=base_seed,
    )


# -- provenance ---------------------------------------------------------------


def provenance_dict(result: PipelineOutput) -> dict:
    """JSON-ready run log.

    Durations are deliberately left out: saved provenance is byte-identical
    across reruns of the same (spec, seed, input).
    """
    phases = []
    for phase in PHASE_NAMES:
        nodes = []
        for e in result.log.get(phase, []):
            node = {
                "index": e.index,
                "kind": e.kind,
                "applied": e.applied,
                "p": e.p,
                "params": e.params,
                "input_dims": list(e.input_dims),
                "output_dims": list(e.output_dims),
            }
            if e.member_index is not None:
                node["member_index"] = e.member_index
                node["selected"] = e.selected
            nodes.append(node)
        phases.append({"phase": phase, "nodes": nodes})
    return {"spec_version": SPEC_VERSION, "seed": result.seed, "phases": phases}


def provenance_json(result: PipelineOutput) -> str:
    return json.dumps(provenance_dict(result), indent=2, sort_keys=True)


def log_digest(result: PipelineOutput) -> str:
    """sha256 over the canonical provenance document."""
    canonical = json.dumps(provenance_dict(result), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# -- composition and adapters ---------------------------------------------------


@dataclass(frozen=True)
class ComposedOutput:
    output: Raster
    parts: tuple[tuple[str, PipelineOutput], ...]

    def entries(self) -> Iterator[tuple[str, AugmentationResult]]:
        for label, part in self.parts:
            for e in part.entries():
                yield label, e


class ComposedPipeline:
    """Two pipelines run back to back; logs stay separate but labeled."""

    def __init__(self, first: PipelineSpec, second: PipelineSpec, labels=("a", "b")):
        self.first = first
        self.second = second
        self.labels = tuple(labels)

    def run(self, img: Raster, seed: int | None = None) -> ComposedOutput:
        out_a = run(self.first, img, seed=seed)
        out_b = run(self.second, out_a.output, seed=seed)
        return ComposedOutput(
            output=out_b.output,
            parts=((self.labels[0], out_a), (self.labels[1], out_b)),
        )


def compose_pipelines(a: PipelineSpec, b: PipelineSpec, labels=("a", "b")) -> ComposedPipeline:
    return ComposedPipeline(a, b, labels=labels)


def wrap_external(fn: Callable[[Raster], Raster], p: float = 1.0, label: str = "") -> EffectNode:
    """Adapt a plain Raster -> Raster callable into a pipeline node.

    The node gates and logs like any catalog effect, under kind "external".
    Such nodes cannot be serialized to JSON.
    """
    return EffectNode(kind=EXTERNAL_KIND, p=p, params={"label": label}, fn=fn)


# -- built-in specs -------------------------------------------------------------


def default_pipeline(
    texture_dir: str | None = None, p: float = 0.3, seed: int = 0
) -> PipelineSpec:
    """One node of every catalog effect in its home phase, each at ``p``.

    ``paper_factory`` joins the paper phase only when a texture directory is
    supplied, since it cannot run without textures.
    """
    buckets: dict[str, list[EffectNode]] = {"ink": [], "paper": [], "post": []}
    for kind, defn in catalog().items():
        if kind == "paper_factory" and not texture_dir:
            continue
        buckets[defn.default_phase].append(EffectNode(kind=kind, p=p))
    return PipelineSpec(
        ink=tuple(buckets["ink"]),
        paper=tuple(buckets["paper"]),
        post=tuple(buckets["post"]),
        seed=seed,
        texture_dir=texture_dir,
    )


BUILTIN_SPECS = {"default": default_pipeline}


def load_builtin(name: str, texture_dir: str | None = None) -> PipelineSpec:
    try:
        builder = BUILTIN_SPECS[name]
    except KeyError:
        raise SpecError(
            f"unknown built-in spec '{name}' (available: {sorted(BUILTIN_SPECS)})"
        ) from None
    return builder(texture_dir=texture_dir)
