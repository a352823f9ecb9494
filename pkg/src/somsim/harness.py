"""Experiment runner: named experiment kinds, seed-ensemble statistics,
canonical JSON/CSV reports and static map renderings.

Every experiment is fully determined by its ExperimentSpec (seeds
included); re-running a spec reproduces the canonical report
byte-for-byte.
"""

from __future__ import annotations

import collections
import hashlib
import json
import os
from dataclasses import dataclass, field

from . import __version__
from .analysis import (AnalysisConfig, analyze_map, calibrate_activation,
                       symptom_of)
from .core import (NO_PATHOLOGY, PathologySpec, TrainingConfig, init_map,
                   train)
from .exceptions import ConfigurationError
from .network import (CASE_COMBOS, MAP_NAMES, PROJ_A, PROJ_B, NetworkSpec,
                      ProjectionSpec, apply_case, combo_label, develop_network)
from .stimuli import DOMAIN, PAIR_BY_CLASS, gen_primary_inputs

SCHEMA_VERSION = 1

KIND_NORMAL = "normal"
KIND_OMEGA = "single_map_omega"
KIND_XI = "single_map_xi"
KIND_SIGMA_SWEEP = "sigma_sweep"
KIND_TWO_LEVEL = "two_level_impairment"
KIND_CASE_MATRIX = "case_matrix"
KIND_CUSTOM = "custom"

KINDS = (KIND_NORMAL, KIND_OMEGA, KIND_XI, KIND_SIGMA_SWEEP, KIND_TWO_LEVEL,
         KIND_CASE_MATRIX, KIND_CUSTOM)

# Category labels counted as a single merged cluster on a front map
SINGLE_CLUSTER_LABELS = ("SingleClusterOverlapping",)


@dataclass
class ExperimentSpec:
    """Complete description of one experiment run."""

    name: str
    kind: str
    seeds: list
    parameters: dict = field(default_factory=dict)
    training: dict = field(default_factory=dict)   # TrainingConfig overrides
    analysis: dict = field(default_factory=dict)   # AnalysisConfig overrides
    pairing_mode: str = PAIR_BY_CLASS
    out_dir: str = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown experiment kind {self.kind!r}")
        if not self.seeds:
            raise ConfigurationError("at least one seed required")
        self.seeds = [int(s) for s in self.seeds]
        _validate_parameters(self.kind, self.parameters)

    def analysis_config(self):
        return AnalysisConfig(**self.analysis)

    def training_config(self, seed, **extra):
        kwargs = dict(self.training)
        kwargs.update(extra)
        kwargs.setdefault("rng_seed", seed)
        return TrainingConfig(**kwargs)

    def canonical_dict(self):
        return {
            "name": self.name,
            "kind": self.kind,
            "seeds": self.seeds,
            "parameters": self.parameters,
            "training": self.training,
            "analysis": self.analysis,
            "pairing_mode": self.pairing_mode,
        }

    def spec_hash(self):
        blob = json.dumps(self.canonical_dict(), sort_keys=True,
                          separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _validate_parameters(kind, params):
    if kind == KIND_OMEGA and params.get("omega", 0) <= 1:
        raise ConfigurationError("single_map_omega requires omega > 1")
    if kind == KIND_XI and params.get("c", 0) <= 1:
        raise ConfigurationError("single_map_xi requires c > 1")
    if kind == KIND_SIGMA_SWEEP and not params.get("sigmas"):
        raise ConfigurationError("sigma_sweep requires a sigmas list")
    if kind == KIND_CASE_MATRIX and params.get("case") not in (1, 2, 3):
        raise ConfigurationError("case_matrix requires case in {1, 2, 3}")


@dataclass
class ExperimentResult:
    """Aggregated outcome of one experiment."""

    spec: ExperimentSpec
    rows: list                 # per-seed (per-condition) summary dicts
    histogram: dict            # scope label -> {category label -> count}
    proportions: dict          # scope label -> {category label -> fraction}
    tables: dict = field(default_factory=dict)  # kind-specific aggregates
    provenance: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "spec": self.spec.canonical_dict(),
            "rows": self.rows,
            "histogram": self.histogram,
            "proportions": self.proportions,
            "tables": self.tables,
            "provenance": self.provenance,
        }


def _provenance(spec):
    return {
        "schema_version": SCHEMA_VERSION,
        "spec_hash": spec.spec_hash(),
        "code_version": __version__,
        "sigma_act": spec.analysis_config().sigma_act,
    }


def summarize_report(report):
    """Flat, JSON-ready summary of one MapReport."""
    sym = symptom_of(report.category, report.dominant_fraction,
                     max_classes=report.max_classes_per_neuron)
    return {
        "category": report.category.label(),
        "tag": report.category.tag,
        "n": report.category.n,
        "overlapping": bool(report.category.overlapping),
        "encoders": report.total_encoders(),
        "clusters": len(report.clusters),
        "isolated": len(report.isolated),
        "overlap_count": report.overlap_count,
        "max_classes_per_neuron": report.max_classes_per_neuron,
        "dominant_fraction": report.dominant_fraction,
        "stability": report.stability,
        "symptom": sym.label,
        "symptom_extrapolated": sym.extrapolated,
    }


def _train_single(spec, seed, pathology=NO_PATHOLOGY, sigma=None):
    sset = gen_primary_inputs(seed)
    fmap = init_map(20, 20, 2, [DOMAIN, DOMAIN], rng_seed=seed + 1)
    extra = {} if sigma is None else {"sigma": sigma}
    cfg = spec.training_config(seed + 2, **extra)
    fmap, trace = train(fmap, sset, cfg, pathology)
    report = analyze_map(fmap, sset, spec.analysis_config(), trace)
    return fmap, report


def _histogram(rows, key="category", scope_key="scope"):
    hist = collections.defaultdict(collections.Counter)
    for row in rows:
        hist[row[scope_key]][row[key]] += 1
    out, props = {}, {}
    for scope in sorted(hist):
        counts = dict(sorted(hist[scope].items()))
        total = sum(counts.values())
        out[scope] = counts
        props[scope] = {k: v / total for k, v in counts.items()}
    return out, props


def _modal(counter):
    # deterministic: highest count, label as tie-break
    return min(counter.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def run_experiment(spec, renders=False):
    """Execute every seed of the experiment; optionally write renderings.

    Returns the ExperimentResult; emit_report writes it to disk.
    """
    runner = {
        KIND_NORMAL: _run_network_kind,
        KIND_CUSTOM: _run_network_kind,
        KIND_TWO_LEVEL: _run_network_kind,
        KIND_OMEGA: _run_single_kind,
        KIND_XI: _run_single_kind,
        KIND_SIGMA_SWEEP: _run_sigma_sweep,
        KIND_CASE_MATRIX: _run_case_matrix_kind,
    }[spec.kind]
    result = runner(spec)
    result.provenance = _provenance(spec)
    if renders and spec.out_dir:
        render_experiment_samples(spec, spec.out_dir)
    return result


def _network_spec(spec, seed):
    params = spec.parameters
    nspec = NetworkSpec(
        master_seed=seed,
        configs={name: spec.training_config(0) for name in MAP_NAMES},
        pairing_mode=spec.pairing_mode,
        analysis=spec.analysis_config(),
    )
    for pid, key in ((PROJ_A, "rho_a"), (PROJ_B, "rho_b")):
        if key in params:
            nspec.projections[pid] = ProjectionSpec(pid, params[key])
    for name, path in params.get("pathologies", {}).items():
        nspec.pathologies[name] = PathologySpec(**path)
    return nspec


def _run_network_kind(spec):
    two_level = spec.kind == KIND_TWO_LEVEL
    if two_level:
        params = spec.parameters
        patho = {}
        if "omega" in params or "sigma_override" in params:
            patho["prim1"] = {
                "mode": "over_strengthen" if "omega" in params else "none",
                "omega": params.get("omega"),
                "sigma_override": params.get("sigma_override"),
            }
        spec = ExperimentSpec(spec.name, spec.kind, spec.seeds,
                              {**params, "pathologies":
                               {**params.get("pathologies", {}), **patho}},
                              spec.training, spec.analysis, spec.pairing_mode,
                              spec.out_dir)
    names = MAP_NAMES[:3] if two_level else MAP_NAMES
    rows = []
    for seed in spec.seeds:
        res = develop_network(_network_spec(spec, seed))
        for name in names:
            if name not in res.reports:
                rows.append({"seed": seed, "scope": name,
                             "category": f"aborted:{res.abort_stage}",
                             "aborted": True})
                continue
            row = {"seed": seed, "scope": name, "aborted": False}
            row.update(summarize_report(res.reports[name]))
            rows.append(row)
    hist, props = _histogram(rows)
    return ExperimentResult(spec, rows, hist, props)


def _run_single_kind(spec):
    if spec.kind == KIND_OMEGA:
        patho = PathologySpec.over_strengthen(
            float(spec.parameters["omega"]),
            spec.parameters.get("sigma_override"))
        scope = f"omega={spec.parameters['omega']:g}"
    else:
        patho = PathologySpec.increase_factor(
            float(spec.parameters["c"]),
            spec.parameters.get("sigma_override"))
        scope = f"c={spec.parameters['c']:g}"
    rows = []
    for seed in spec.seeds:
        _, report = _train_single(spec, seed, patho)
        row = {"seed": seed, "scope": scope}
        row.update(summarize_report(report))
        rows.append(row)
    hist, props = _histogram(rows)
    return ExperimentResult(spec, rows, hist, props)


def _run_sigma_sweep(spec):
    rows = []
    means = {}
    for sigma in spec.parameters["sigmas"]:
        scope = f"sigma={sigma:g}"
        counts = []
        for seed in spec.seeds:
            _, report = _train_single(spec, seed, sigma=float(sigma))
            row = {"seed": seed, "scope": scope, "sigma": float(sigma)}
            row.update(summarize_report(report))
            rows.append(row)
            counts.append(row["encoders"])
        means[scope] = sum(counts) / len(counts)
    hist, props = _histogram(rows)
    return ExperimentResult(spec, rows, hist, props,
                            tables={"mean_encoders": means})


def run_case_matrix(case, seeds, base_spec=None, omega=5.0):
    """All 11 combos x seeds for one disruption case.

    Emits per-combo modal categories for every map, the histogram of
    modal front/assoc outcomes across combos, and the linkage count of
    combos whose modal assoc is a single encoder followed by a
    single-cluster front.
    """
    spec = base_spec or ExperimentSpec(
        f"case{case}", KIND_CASE_MATRIX, list(seeds),
        parameters={"case": int(case)})
    rows = []
    combo_rows = []
    per_combo = {}
    for combo in CASE_COMBOS:
        label = combo_label(combo)
        cats = {name: collections.Counter() for name in MAP_NAMES}
        for seed in spec.seeds:
            nspec = apply_case(_network_spec(spec, seed), case, combo, omega)
            res = develop_network(nspec)
            for name in MAP_NAMES:
                if name in res.reports:
                    row = {"seed": seed, "scope": f"{label}:{name}",
                           "combo": label, "map": name, "aborted": False}
                    row.update(summarize_report(res.reports[name]))
                else:
                    row = {"seed": seed, "scope": f"{label}:{name}",
                           "combo": label, "map": name, "aborted": True,
                           "category": f"aborted:{res.abort_stage}"}
                rows.append(row)
                cats[name][row["category"]] += 1
        modal = {name: _modal(cats[name]) for name in MAP_NAMES}
        per_combo[label] = modal
        combo_rows.append({"combo": label, **modal})
    front_hist = collections.Counter(m["front"] for m in per_combo.values())
    assoc_hist = collections.Counter(m["assoc"] for m in per_combo.values())
    single_assoc = [lbl for lbl, m in per_combo.items()
                    if m["assoc"].startswith("SingleEncoder")]
    linked = [lbl for lbl in single_assoc
              if per_combo[lbl]["front"].startswith(SINGLE_CLUSTER_LABELS)]
    hist, props = _histogram(rows)
    tables = {
        "case": case,
        "modal_by_combo": combo_rows,
        "modal_front_histogram": dict(sorted(front_hist.items())),
        "modal_assoc_histogram": dict(sorted(assoc_hist.items())),
        "linkage": {
            "single_encoder_assoc_combos": single_assoc,
            "single_cluster_front_among_them": linked,
        },
    }
    result = ExperimentResult(spec, rows, hist, props, tables=tables)
    result.provenance = _provenance(spec)
    return result


def _run_case_matrix_kind(spec):
    return run_case_matrix(spec.parameters["case"], spec.seeds, spec,
                           spec.parameters.get("omega", 5.0))


# ---------------------------------------------------------------------------
# reports

def emit_report(result, path):
    """Write the canonical JSON document and the per-row CSV.

    Returns the two file paths. The JSON re-parses into an equal result
    via load_report.
    """
    base = os.path.splitext(path)[0]
    json_path, csv_path = base + ".json", base + ".csv"
    os.makedirs(os.path.dirname(os.path.abspath(json_path)), exist_ok=True)
    doc = result.to_dict()
    try:
        with open(json_path, "w") as fh:
            json.dump(doc, fh, sort_keys=True, indent=1)
            fh.write("\n")
        _write_csv(result.rows, csv_path)
    except OSError as exc:
        raise ConfigurationError(f"cannot write report {base}: {exc}")
    return json_path, csv_path


def _write_csv(rows, path):
    if not rows:
        with open(path, "w") as fh:
            fh.write("\n")
        return
    cols = sorted({k for row in rows for k in row})
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join("" if row.get(c) is None else str(row.get(c))
                              for c in cols) + "\n")


def load_report(json_path):
    """Re-parse an emitted JSON document into an ExperimentResult."""
    with open(json_path) as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigurationError(
            f"unsupported report schema {doc.get('schema_version')!r}")
    sd = doc["spec"]
    spec = ExperimentSpec(sd["name"], sd["kind"], sd["seeds"],
                          sd["parameters"], sd["training"], sd["analysis"],
                          sd["pairing_mode"])
    return ExperimentResult(spec, doc["rows"], doc["histogram"],
                            doc["proportions"], doc["tables"],
                            doc["provenance"])


def results_equal(a, b):
    return a.to_dict() == b.to_dict()


# ---------------------------------------------------------------------------
# renderings

FORMAT_PGM = "portable-graymap"
FORMAT_SVG = "scalable-vector"

_CLASS_GRAYS = (60, 110, 160, 210)
_CLASS_COLORS = ("#d62728", "#1f77b4", "#2ca02c", "#ff7f0e")
_OVERLAP_GRAY = 0


def render_map(report, fmt=FORMAT_SVG):
    """Render one encoder field as image bytes.

    Non-encoders are blank, encoders take their class color/gray, and a
    neuron encoding several classes gets the overlap marker (darkest gray
    in the graymap, an asterisk glyph in the vector format). Byte output
    is deterministic for a given report.
    """
    fieldv = report.encoder_field
    if fmt == FORMAT_PGM:
        return _render_pgm(fieldv)
    if fmt == FORMAT_SVG:
        return _render_svg(fieldv)
    raise ConfigurationError(f"unsupported render format {fmt!r}")


def _cell(fieldv, idx):
    classes = sorted(fieldv.classes_of(idx))
    if not classes:
        return None, False
    return classes[0], len(classes) >= 2


def _render_pgm(fieldv):
    lines = ["P2", f"{fieldv.width} {fieldv.height}", "255"]
    for r in range(fieldv.height):
        row = []
        for c in range(fieldv.width):
            cls, multi = _cell(fieldv, r * fieldv.width + c)
            if cls is None:
                row.append(255)
            elif multi:
                row.append(_OVERLAP_GRAY)
            else:
                row.append(_CLASS_GRAYS[cls % 4])
        lines.append(" ".join(map(str, row)))
    return ("\n".join(lines) + "\n").encode()


def _render_svg(fieldv):
    cell = 16
    w, h = fieldv.width * cell, fieldv.height * cell
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="white" stroke="none"/>',
    ]
    for r in range(fieldv.height):
        for c in range(fieldv.width):
            cls, multi = _cell(fieldv, r * fieldv.width + c)
            if cls is None:
                continue
            x, y = c * cell, r * cell
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="{_CLASS_COLORS[cls % 4]}" stroke="black" '
                f'stroke-width="0.5"/>')
            if multi:
                parts.append(
                    f'<text x="{x + cell // 2}" y="{y + cell - 3}" '
                    f'font-size="{cell}" text-anchor="middle" '
                    f'fill="black">*</text>')
    parts.append("</svg>")
    return ("\n".join(parts) + "\n").encode()


def render_experiment_samples(spec, out_dir, fmt=FORMAT_SVG):
    """Write one rendering per map for the first seed of the experiment."""
    ext = ".svg" if fmt == FORMAT_SVG else ".pgm"
    os.makedirs(out_dir, exist_ok=True)
    seed = spec.seeds[0]
    written = []
    if spec.kind in (KIND_OMEGA, KIND_XI):
        if spec.kind == KIND_OMEGA:
            patho = PathologySpec.over_strengthen(
                float(spec.parameters["omega"]))
        else:
            patho = PathologySpec.increase_factor(float(spec.parameters["c"]))
        _, report = _train_single(spec, seed, patho)
        reports = {"map": report}
    elif spec.kind == KIND_SIGMA_SWEEP:
        reports = {}
        for sigma in spec.parameters["sigmas"]:
            _, rep = _train_single(spec, seed, sigma=float(sigma))
            reports[f"sigma{sigma:g}"] = rep
    else:
        nspec = _network_spec(spec, seed)
        if spec.kind == KIND_CASE_MATRIX:
            combo = spec.parameters.get("combo", sorted(CASE_COMBOS[0]))
            nspec = apply_case(nspec, spec.parameters["case"], combo,
                               spec.parameters.get("omega", 5.0))
        res = develop_network(nspec)
        reports = dict(res.reports)
    for name, report in sorted(reports.items()):
        path = os.path.join(out_dir, f"{spec.name}-{name}-seed{seed}{ext}")
        with open(path, "wb") as fh:
            fh.write(render_map(report, fmt))
        written.append(path)
    return written


def calibrate_and_freeze(seeds=None):
    """Convenience wrapper returning a calibrated AnalysisConfig."""
    seeds = list(seeds) if seeds is not None else list(range(20))
    sigma_act = calibrate_activation(seeds)
    return AnalysisConfig(sigma_act=sigma_act)
