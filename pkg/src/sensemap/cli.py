"""Command-line frontend: ``sensemap <subcommand> [options]``.

Exit status is 0 on success, 1 for invalid input (bad flags, missing or
malformed files) and 2 for numerical or internal failures.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from contextlib import nullcontext
from pathlib import Path
from typing import List, Optional

import numpy as np

from .clustering import ClusteringConfig
from .errors import SenseMapError
from .evaluation import evaluate_artifact, map_recovery_error
from .ingest import DEFAULT_CAP, SentenceRecord, read_corpus, read_corpus_dim, write_corpus
from .isotropy import INTransform, anisotropy_score, apply_in, in_convergence
from .linalg import EmbeddingMatrix
from .pipeline import (
    PipelineConfig,
    collect,
    fit_mapping,
    load_artifact,
    save_artifact,
    transfer_matrix,
    write_word2vec,
)
from .synth import SynthConfig, generate_synthetic, load_ground_truth


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _corpus_matrix(path) -> EmbeddingMatrix:
    dim = read_corpus_dim(path)
    rows = [rec.vectors for rec in read_corpus(path)]
    data = np.concatenate(rows) if rows else np.empty((0, dim))
    return EmbeddingMatrix.from_rows(data, dim=dim)


def _cmd_align(args) -> int:
    cfg = PipelineConfig(
        cap=args.max_vectors,
        min_count=args.min_count,
        clustering=ClusteringConfig(k_max=args.kmax, min_cluster_size=args.min_cluster_size),
        in_iterations=args.in_iters,
        use_in=not args.no_in,
        lowercase=args.lowercase,
        level=args.level,
        seed=args.seed,
        target_side=args.target_side,
    )
    coll = collect(args.target_corpus, args.source_corpus, args.alignments, cfg)
    result = fit_mapping(coll, cfg)
    a = result.artifact
    save_artifact(a, args.out)
    if args.export_anchors:
        write_word2vec(f"{args.export_anchors}.target.vec", result.X_s)
        write_word2vec(f"{args.export_anchors}.source.vec", result.Y_s)
    print(f"types: {len(coll)}")
    print(f"anchors: {a.anchor_count} ({a.level} level, IN {'on' if a.use_in else 'off'})")
    print(f"residual: {a.residual!r}")
    for w in a.warnings:
        print(f"warning: {w}")
    print(f"wrote {args.out}")
    return 0


def _cmd_apply(args) -> int:
    artifact = load_artifact(args.artifact)

    def mapped():
        for rec in read_corpus(args.corpus):
            if len(rec) == 0:
                yield rec
                continue
            out = transfer_matrix(artifact, EmbeddingMatrix.from_rows(rec.vectors))
            yield SentenceRecord(rec.id, rec.tokens, out.values.T)

    write_corpus(args.out, artifact.dim, mapped())
    print(f"wrote {args.out}")
    return 0


def _cmd_anisotropy(args) -> int:
    M = _corpus_matrix(args.corpus)
    score = anisotropy_score(M, args.sample, args.seed)
    print(f"vectors: {M.count}")
    print(f"score: {score!r}")
    if args.csv:
        label = args.label if args.label is not None else Path(args.corpus).name
        with open(args.csv, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["label", "n_vectors", "sample_size", "seed", "score"])
            w.writerow([label, M.count, min(args.sample, M.count), args.seed, repr(score)])
    return 0


def _cmd_in(args) -> int:
    M = _corpus_matrix(args.corpus)
    if args.transform:
        with open(args.transform, encoding="utf-8") as f:
            transform = INTransform(np.array(json.load(f)["means"], dtype=np.float64))
        out = apply_in(transform, M)
        rows = [(0, None, anisotropy_score(M, args.sample, args.seed)),
                (transform.iterations, None, anisotropy_score(out, args.sample, args.seed))]
    else:
        transform, out, rows = in_convergence(M, args.iters, args.sample, args.seed)
    for t, norm, score in rows:
        norm_s = "-" if norm is None else f"{norm:.6g}"
        print(f"iteration {t}: mean_norm {norm_s} anisotropy {score:.6g}")
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["iteration", "mean_norm", "anisotropy_score"])
            for t, norm, score in rows:
                w.writerow([t, "" if norm is None else repr(norm), repr(score)])
    if args.transform_out:
        with open(args.transform_out, "w", encoding="utf-8", newline="\n") as f:
            f.write(json.dumps({"means": transform.means.tolist()}) + "\n")
    if args.out:
        records = read_corpus(args.corpus)
        vectors = out.values.T

        def transformed():
            offset = 0
            for rec in records:
                n = len(rec)
                yield SentenceRecord(rec.id, rec.tokens, vectors[offset:offset + n])
                offset += n

        write_corpus(args.out, M.dim, transformed())
    return 0


def _cmd_eval(args) -> int:
    artifact = load_artifact(args.artifact)
    truth = load_ground_truth(args.truth)
    ks = sorted(set(args.k))
    scores = evaluate_artifact(artifact, truth, ks)
    for k in ks:
        print(f"P@{k}: {scores[k]:.4f}")
    if truth.A.shape == artifact.W.shape:
        print(f"map_error: {map_recovery_error(artifact.W, truth.A):.6g}")
    return 0


def _cmd_synth(args) -> int:
    frac = args.two_sense_frac
    cfg = SynthConfig(
        dim=args.dim,
        n_types=args.n_types,
        n_sentences=args.n_sentences,
        sentence_len=args.sentence_len,
        sense_fractions=(1.0 - frac, frac),
        noise_sigma=args.noise,
        anisotropy_offset_norm=args.anisotropy_offset,
        source_anisotropy_offset_norm=args.source_anisotropy_offset,
        sense_offset_norm=args.sense_offset,
        seed=args.seed,
    )
    b = generate_synthetic(cfg, args.out_dir)
    for p in (b.target, b.source, b.alignments, b.truth):
        print(f"wrote {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sensemap", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=None, help="cap BLAS worker threads")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("align", help="learn a target-to-source mapping artifact")
    a.add_argument("--target-corpus", required=True)
    a.add_argument("--source-corpus", required=True)
    a.add_argument("--alignments", required=True)
    a.add_argument("--target-side", choices=["left", "right"], default="left",
                   help="which side of each a-b link indexes the target corpus")
    a.add_argument("--out", required=True)
    a.add_argument("--level", choices=["word", "sense"], default="sense")
    a.add_argument("--max-vectors", type=int, default=DEFAULT_CAP)
    a.add_argument("--min-count", type=int, default=100)
    a.add_argument("--kmax", type=int, default=10)
    a.add_argument("--min-cluster-size", type=int, default=5)
    a.add_argument("--in-iters", type=int, default=5)
    a.add_argument("--no-in", action="store_true")
    a.add_argument("--lowercase", action=argparse.BooleanOptionalAction, default=True)
    a.add_argument("--seed", type=int, default=42)
    a.add_argument("--export-anchors", metavar="PREFIX")
    a.set_defaults(func=_cmd_align)

    ap = sub.add_parser("apply", help="map a target corpus into the source space")
    ap.add_argument("--artifact", required=True)
    ap.add_argument("--corpus", required=True)
    ap.add_argument("--out", required=True)
    ap.set_defaults(func=_cmd_apply)

    an = sub.add_parser("anisotropy", help="mean pairwise cosine of sampled vectors")
    an.add_argument("--corpus", required=True)
    an.add_argument("--sample", type=int, default=1000)
    an.add_argument("--seed", type=int, default=0)
    an.add_argument("--label")
    an.add_argument("--csv")
    an.set_defaults(func=_cmd_anisotropy)

    it = sub.add_parser("in", help="fit or apply iterative normalization")
    it.add_argument("--corpus", required=True)
    it.add_argument("--iters", type=int, default=5)
    it.add_argument("--transform", help="apply a saved transform instead of fitting")
    it.add_argument("--transform-out")
    it.add_argument("--out", help="write the normalized corpus")
    it.add_argument("--sample", type=int, default=1000)
    it.add_argument("--seed", type=int, default=0)
    it.add_argument("--csv", help="per-iteration convergence table")
    it.set_defaults(func=_cmd_in)

    ev = sub.add_parser("eval-retrieval", help="P@k of a mapping against synthetic ground truth")
    ev.add_argument("--artifact", required=True)
    ev.add_argument("--truth", required=True)
    ev.add_argument("--k", type=int, nargs="+", default=[1, 5])
    ev.set_defaults(func=_cmd_eval)

    sy = sub.add_parser("synth", help="write a synthetic bilingual bundle with a planted map")
    sy.add_argument("--out-dir", required=True)
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--dim", type=int, default=32)
    sy.add_argument("--n-types", type=int, default=500)
    sy.add_argument("--n-sentences", type=int, default=2000)
    sy.add_argument("--sentence-len", type=int, default=10)
    sy.add_argument("--two-sense-frac", type=float, default=0.2)
    sy.add_argument("--noise", type=float, default=0.01)
    sy.add_argument("--anisotropy-offset", type=float, default=0.0)
    sy.add_argument("--source-anisotropy-offset", type=float, default=0.0)
    sy.add_argument("--sense-offset", type=float, default=0.0)
    sy.set_defaults(func=_cmd_synth)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return 1
    limits = nullcontext()
    if args.threads is not None:
        from threadpoolctl import threadpool_limits

        limits = threadpool_limits(args.threads)
    try:
        with limits:
            return args.func(args)
    except SenseMapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
