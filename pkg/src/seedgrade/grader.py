"""Per-answer-type grading: preprocess, parse, and score one prediction
against one ground truth. Prediction-side failures always become score-0
results; only ground-truth failures raise."""

from __future__ import annotations

from .canon import canonicalize, equation_equivalent, standardize_relation
from .ted import distance_to_score
from .config import GradeConfig
from .errors import DimensionMismatch, GradingError, GroundTruthInvalid
from .nodes import AnswerType, Kind, MathNode, TypedAnswer
from .preprocess import canonicalize_latex, extract_final_answer
from .parser import parse_answer
from .ted import GradeResult, seed_score
from .units import compare_quantities


def _zero(diagnostics) -> GradeResult:
    return GradeResult(
        score=0.0,
        equivalent=False,
        distance=float("inf"),
        relative_distance=float("inf"),
        edit_script=[],
        diagnostics=list(diagnostics),
    )


def parse_ground_truth(gt_raw: str, declared: AnswerType, cfg: GradeConfig = GradeConfig()) -> TypedAnswer:
    try:
        clean = canonicalize_latex(gt_raw, max_bracket_inserts=cfg.max_bracket_inserts)
        return parse_answer(clean, declared)
    except GradingError as exc:
        raise GroundTruthInvalid(f"ground truth {gt_raw!r} invalid: {exc}") from exc


def _parse_prediction(pred_raw: str, declared: AnswerType, cfg: GradeConfig):
    """TypedAnswer for the prediction, or (None, diagnostics) on failure.

    A failed declared-type parse is retried as a bare expression: models
    often drop tuple parentheses or restate a lone value.
    """
    diagnostics: list = []
    try:
        segment = extract_final_answer(pred_raw)
        clean = canonicalize_latex(segment, max_bracket_inserts=cfg.max_bracket_inserts)
    except GradingError as exc:
        return None, [f"{type(exc).__name__}: {exc}"]
    try:
        return parse_answer(clean, declared), diagnostics
    except GradingError as exc:
        diagnostics.append(f"{type(exc).__name__}: {exc}")
    if declared is not AnswerType.EXPRESSION:
        try:
            retried = parse_answer(clean, AnswerType.EXPRESSION)
            diagnostics.append("retried-as-expression")
            return retried, diagnostics
        except GradingError as exc:
            diagnostics.append(f"{type(exc).__name__}: {exc}")
    return None, diagnostics


def grade_expression(pred: MathNode, gt: MathNode, cfg: GradeConfig = GradeConfig()) -> GradeResult:
    return seed_score(pred, gt, cfg)


def grade_equation(pred: MathNode, gt: MathNode, cfg: GradeConfig = GradeConfig()) -> GradeResult:
    if pred.kind is not Kind.RELATION:
        return _zero(["TypeMismatch: prediction is not an equation"])
    if equation_equivalent(pred, gt, cfg.equiv()):
        return GradeResult(
            score=cfg.max_score,
            equivalent=True,
            distance=0,
            relative_distance=0.0,
            diagnostics=["equation-equivalent"],
        )
    sp = standardize_relation(pred)
    sg = standardize_relation(gt)
    result = seed_score(sp.children[0], sg.children[0], cfg)
    result.equivalent = False
    result.diagnostics.append("graded-on-standardized-sides")
    if sp.payload != sg.payload:
        # relation direction counts as one more relabel on the one-sided form
        gt_size = canonicalize(sg.children[0]).size
        d = (0 if result.distance == 0 else float(result.distance)) + cfg.rename_cost
        result.distance = d
        result.relative_distance = d / gt_size
        result.score = distance_to_score(d, gt_size, cfg)
        result.diagnostics.append("relation-direction-mismatch")
    return result


def grade_tuple(pred: TypedAnswer, gt: TypedAnswer, cfg: GradeConfig = GradeConfig()) -> GradeResult:
    return _grade_tuple_parts(list(pred.parts), list(gt.parts), cfg)


def _grade_tuple_parts(pred_parts: list, gt_parts: list, cfg: GradeConfig) -> GradeResult:
    n = max(len(pred_parts), len(gt_parts))
    scores = []
    scripts = []
    diagnostics = []
    all_equiv = len(pred_parts) == len(gt_parts)
    total_distance = 0.0
    for i in range(n):
        if i >= len(pred_parts) or i >= len(gt_parts):
            scores.append(0.0)
            diagnostics.append(f"component {i}: missing")
            continue
        r = seed_score(pred_parts[i], gt_parts[i], cfg)
        scores.append(r.score)
        scripts.extend(r.edit_script)
        total_distance += float(r.distance)
        all_equiv = all_equiv and r.equivalent
        diagnostics.extend(f"component {i}: {d}" for d in r.diagnostics)
    if len(pred_parts) != len(gt_parts):
        diagnostics.append(
            f"length mismatch: {len(pred_parts)} vs {len(gt_parts)}, averaged over {n}"
        )
    score = sum(scores) / n
    return GradeResult(
        score=score,
        equivalent=all_equiv,
        distance=0 if all_equiv else total_distance,
        relative_distance=0.0 if all_equiv else 1.0 - score / cfg.max_score,
        edit_script=scripts,
        diagnostics=diagnostics,
    )


def grade_interval(pred: TypedAnswer, gt: TypedAnswer, cfg: GradeConfig = GradeConfig()) -> GradeResult:
    pnode = pred.parts[0]
    gnode = gt.parts[0]
    if pnode.kind is not Kind.INTERVAL:
        return _zero(["TypeMismatch: prediction is not an interval"])
    lo = seed_score(pnode.children[0], gnode.children[0], cfg)
    hi = seed_score(pnode.children[1], gnode.children[1], cfg)
    mismatched = sum(
        1 for a, b in zip(pnode.payload, gnode.payload) if a != b
    )
    factor = 1.0 - cfg.openness_penalty * mismatched / 2
    score = (lo.score + hi.score) / 2 * factor
    diagnostics = list(lo.diagnostics) + list(hi.diagnostics)
    if mismatched:
        diagnostics.append(f"boundary openness mismatch on {mismatched} endpoint(s)")
    equivalent = lo.equivalent and hi.equivalent and mismatched == 0
    return GradeResult(
        score=score,
        equivalent=equivalent,
        distance=0 if equivalent else float(lo.distance) + float(hi.distance),
        relative_distance=0.0 if equivalent else 1.0 - score / cfg.max_score,
        edit_script=lo.edit_script + hi.edit_script,
        diagnostics=diagnostics,
    )


def grade_numeric(pred: TypedAnswer, gt: TypedAnswer, cfg: GradeConfig = GradeConfig()) -> GradeResult:
    if pred.quantity is None:
        return _zero(["TypeMismatch: prediction is not a quantity"])
    try:
        ok = compare_quantities(pred.quantity, gt.quantity, cfg.rtol)
    except DimensionMismatch as exc:
        return _zero([f"DimensionMismatch: {exc}"])
    if ok:
        return GradeResult(
            score=cfg.max_score,
            equivalent=True,
            distance=0,
            relative_distance=0.0,
            diagnostics=[f"within rtol {cfg.rtol}"],
        )
    rel = abs(pred.quantity.magnitude - gt.quantity.magnitude) / max(
        abs(gt.quantity.magnitude), 1e-300
    )
    diagnostics = [f"magnitude off by relative error {rel:.3g}"]
    if cfg.numeric_partial:
        score = cfg.max_score * max(0.0, 1.0 - rel)
        return GradeResult(
            score=score,
            equivalent=False,
            distance=rel,
            relative_distance=rel,
            diagnostics=diagnostics + ["numeric partial credit enabled"],
        )
    return _zero(diagnostics)


def grade_parsed(pred: TypedAnswer, gt: TypedAnswer, cfg: GradeConfig = GradeConfig()) -> GradeResult:
    t = gt.answer_type
    if t is AnswerType.EXPRESSION:
        if pred.answer_type is AnswerType.EXPRESSION:
            return grade_expression(pred.parts[0], gt.parts[0], cfg)
        return _zero(["TypeMismatch: expected an expression"])
    if t is AnswerType.EQUATION:
        return grade_equation(pred.parts[0], gt.parts[0], cfg)
    if t is AnswerType.TUPLE:
        # a lone expression is graded as a 1-part tuple (positional)
        return _grade_tuple_parts(list(pred.parts), list(gt.parts), cfg)
    if t is AnswerType.INTERVAL:
        if pred.answer_type is not AnswerType.INTERVAL:
            return _zero(["TypeMismatch: expected an interval"])
        return grade_interval(pred, gt, cfg)
    if t is AnswerType.NUMERIC:
        return grade_numeric(pred, gt, cfg)
    raise AssertionError(t)


def grade(
    pred_raw: str,
    gt_raw: str,
    declared: AnswerType,
    cfg: GradeConfig = GradeConfig(),
) -> GradeResult:
    """Grade one raw prediction text against one ground-truth LaTeX string."""
    gt = parse_ground_truth(gt_raw, declared, cfg)
    pred, diagnostics = _parse_prediction(pred_raw, declared, cfg)
    if pred is None:
        return _zero(diagnostics)
    result = grade_parsed(pred, gt, cfg)
    result.diagnostics = diagnostics + result.diagnostics
    return result
