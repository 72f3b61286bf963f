"""
Analysis of generated corpora: the rho / CPU-time regression and the CSV
series behind the result figures.
"""

from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union
import logging
import math

import numpy as np
import pandas as pd
from pydantic import BaseModel
from scipy import stats

from amgann.dataset.corpus import Sample
from amgann.exceptions import ContractViolation, DegenerateInputError
from amgann.ml.config.settings import PREDICT_BATCH_SIZE
from amgann.ml.utils.data_loader import SampleArrays

logger = logging.getLogger(__name__)


class LeastSquaresReport(BaseModel):
    """Through-origin OLS fit t = beta * rho on per-test-case normalized data."""
    level: Optional[int] = None
    n_obs: int
    r_squared: float
    adj_r_squared: float
    f_statistic: float
    f_pvalue: float
    coefficient: float
    std_error: float
    t_value: float
    p_value: float
    aic: float


def ols_through_origin(x: Sequence[float], y: Sequence[float], level: Optional[int] = None) -> LeastSquaresReport:
    """
    Fit y = beta x without intercept.

    R^2 is the uncentered one (1 - SSR / sum y^2), adjusted with n / (n - 1);
    the log-likelihood assumes Gaussian residuals with variance SSR / n.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.size
    if n < 3:
        raise ContractViolation(f"least squares needs at least 3 samples, got {n}")
    sxx = float(x @ x)
    tss = float(y @ y)
    if sxx == 0.0 or tss == 0.0:
        raise DegenerateInputError("least squares on zero data")
    beta = float(x @ y) / sxx
    ssr = float(np.sum((y - beta * x) ** 2))
    df_resid = n - 1
    r2 = 1.0 - ssr / tss
    adj_r2 = 1.0 - n / df_resid * (1.0 - r2)

    scale = ssr / df_resid
    std_error = math.sqrt(scale / sxx)
    t_value = beta / std_error if std_error > 0 else math.copysign(math.inf, beta)
    f_stat = (tss - ssr) / scale if scale > 0 else math.inf
    llf = -n / 2.0 * (math.log(2 * math.pi) + math.log(ssr / n) + 1.0) if ssr > 0 else math.inf
    return LeastSquaresReport(
        level=level,
        n_obs=n,
        r_squared=r2,
        adj_r_squared=adj_r2,
        f_statistic=f_stat,
        f_pvalue=float(stats.f.sf(f_stat, 1, df_resid)),
        coefficient=beta,
        std_error=std_error,
        t_value=t_value,
        p_value=float(2.0 * stats.t.sf(abs(t_value), df_resid)),
        aic=-2.0 * llf + 2.0,
    )


def normalized_rho_time(samples: Sequence[Sample]) -> pd.DataFrame:
    """
    rho and mean CPU time of every sample divided by their maxima inside the
    sample's test case (pattern, exponents, N).
    """
    rows = [{
        "case": str(s.record.case_key),
        "level": s.record.neg_log2_h,
        "pattern": s.record.pattern,
        "exponents": " ".join(f"{e:g}" for e in s.record.exponents),
        "N": s.record.N,
        "theta": s.record.theta,
        "rho": s.record.rho,
        "time": s.record.elapsed_mean,
    } for s in samples]
    frame = pd.DataFrame(rows)
    if frame.empty:
        return frame
    grouped = frame.groupby("case")
    frame["rho_norm"] = frame["rho"] / grouped["rho"].transform("max")
    frame["time_norm"] = frame["time"] / grouped["time"].transform("max")
    return frame.fillna(0.0)


def least_squares_rho_time(samples: Sequence[Sample], level: Optional[int] = None) -> LeastSquaresReport:
    """
    Regression of normalized CPU time on normalized rho at one mesh level.

    Raises:
        ContractViolation: fewer than 3 samples, or samples from several levels
    """
    levels = {s.record.neg_log2_h for s in samples}
    if level is not None:
        samples = [s for s in samples if s.record.neg_log2_h == level]
    elif len(levels) > 1:
        raise ContractViolation(f"samples span several mesh levels {sorted(levels)}")
    if not samples:
        raise ContractViolation("no samples at the requested level")
    if all(s.record.repetitions == 0 for s in samples):
        raise DegenerateInputError("samples carry no timings")
    frame = normalized_rho_time(samples)
    return ols_through_origin(frame["rho_norm"], frame["time_norm"], level=int(frame["level"].iloc[0]))


def least_squares_by_level(samples: Sequence[Sample]) -> Dict[int, LeastSquaresReport]:
    """One regression report per mesh level present in ``samples``."""
    by_level: Dict[int, List[Sample]] = defaultdict(list)
    for sample in samples:
        by_level[sample.record.neg_log2_h].append(sample)
    reports = {}
    for level in sorted(by_level):
        try:
            reports[level] = least_squares_rho_time(by_level[level])
        except (ContractViolation, DegenerateInputError) as exc:
            logger.warning(f"Skipping level {level}: {exc}")
    return reports


def _predictions(samples: Sequence[Sample], model) -> np.ndarray:
    arrays = SampleArrays.from_samples(samples, model.mode)
    step = PREDICT_BATCH_SIZE
    return np.concatenate([
        model.forward(arrays.views[i:i + step], arrays.log_h[i:i + step], arrays.theta[i:i + step])
        for i in range(0, len(arrays), step)
    ])


def export_figures(samples: Sequence[Sample], out_dir: Union[str, Path], model=None) -> List[Path]:
    """
    Write the CSV series of the result plots.

    rho_time_scatter.csv: normalized (rho, t) per sample, by level.
    rho_vs_theta.csv: rho against theta for every (pattern, exponents, level),
        with the model prediction when a model is given.
    predicted_vs_true.csv: per-sample true and predicted rho (model only),
        keyed by the exponent pair for dataset-2 samples.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    scatter = normalized_rho_time(samples)
    if not scatter.empty:
        path = out_dir / "rho_time_scatter.csv"
        scatter.drop(columns=["case"]).to_csv(path, index=False)
        written.append(path)

    curves = pd.DataFrame([{
        "dataset": s.record.dataset,
        "pattern": s.record.pattern,
        "exponents": " ".join(f"{e:g}" for e in s.record.exponents),
        "level": s.record.neg_log2_h,
        "theta": s.record.theta,
        "rho": s.record.rho,
    } for s in samples])
    predicted = _predictions(samples, model) if model is not None and len(samples) else None
    if predicted is not None:
        curves["rho_pred"] = predicted
    if not curves.empty:
        path = out_dir / "rho_vs_theta.csv"
        curves.sort_values(["dataset", "pattern", "exponents", "level", "theta"]).to_csv(path, index=False)
        written.append(path)

    if predicted is not None:
        pairs = [s.record.epsilons if s.record.epsilons is not None else (None, None) for s in samples]
        scatter_pred = pd.DataFrame({
            "dataset": [s.record.dataset for s in samples],
            "pattern": [s.record.pattern for s in samples],
            "epsilon1": [p[0] for p in pairs],
            "epsilon2": [p[1] for p in pairs],
            "level": [s.record.neg_log2_h for s in samples],
            "theta": [s.record.theta for s in samples],
            "rho_true": [s.record.rho for s in samples],
            "rho_pred": predicted,
        })
        path = out_dir / "predicted_vs_true.csv"
        scatter_pred.to_csv(path, index=False)
        written.append(path)

    for path in written:
        logger.info(f"Wrote {path}")
    return written
