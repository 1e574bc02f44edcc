import logging
from pathlib import Path

import pandas as pd
import plotly.express as px

from lg_protocols import LG_BOUND

logger = logging.getLogger(__name__)

# --- Configuration ---

SWEEP_COLUMNS = ["theta", "c12", "c23", "c13", "k", "engine"]
INVASIVENESS_COLUMNS = [
    "input", "theta",
    "before_x", "before_y", "before_z",
    "after_x", "after_y", "after_z",
    "disp_x", "disp_y", "disp_z",
]
COIN_COLUMNS = ["step", "operation", "face_before", "face_after", "observer_heads", "observer_tails"]
FLOAT_FORMAT = "%.17g"
LINE_TERMINATOR = "\r\n"

# --- Result Tables ---

def _sweep_record(theta, cs, engine):
    return {"theta": theta, "c12": cs.c12, "c23": cs.c23, "c13": cs.c13, "k": cs.k, "engine": engine}


def sweep_frame(rows, engine):
    """One row per angle with the fixed sweep schema."""
    return pd.DataFrame([_sweep_record(theta, cs, engine) for theta, cs in rows], columns=SWEEP_COLUMNS)


def compare_frame(separate_rows, simultaneous_rows):
    """Separate and simultaneous rows interleaved per angle."""
    records = []
    for (theta, separate), (_, simultaneous) in zip(separate_rows, simultaneous_rows):
        records.append(_sweep_record(theta, separate, "separate"))
        records.append(_sweep_record(theta, simultaneous, "simultaneous"))
    return pd.DataFrame(records, columns=SWEEP_COLUMNS)


def invasiveness_frame(reports_by_theta):
    """Flattens (theta, reports) pairs into one row per input state and angle."""
    records = []
    for theta, reports in reports_by_theta:
        for report in reports:
            row = {"input": report.input_label, "theta": theta}
            for prefix, vector in (("before", report.bloch_before), ("after", report.bloch_after), ("disp", report.displacement)):
                row.update({f"{prefix}_{axis}": value for axis, value in zip("xyz", vector)})
            records.append(row)
    return pd.DataFrame(records, columns=INVASIVENESS_COLUMNS)


def coin_frame(steps):
    records = [
        {
            "step": index,
            "operation": operation,
            "face_before": before.face,
            "face_after": after.face,
            "observer_heads": after.observer_distribution[0],
            "observer_tails": after.observer_distribution[1],
        }
        for index, (before, operation, after) in enumerate(steps, start=1)
    ]
    return pd.DataFrame(records, columns=COIN_COLUMNS)


def quantity_frame(quantities):
    """Two-column ``quantity,value`` table from an ordered mapping."""
    return pd.DataFrame({"quantity": list(quantities), "value": list(quantities.values())}, columns=["quantity", "value"])

# --- CSV I/O ---

def write_csv(df, path):
    """Writes ``df`` deterministically: CRLF rows, '.' decimals, 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator=LINE_TERMINATOR)
    logger.debug("wrote %d rows to %s", len(df), path)
    return path


def load_sweep(path):
    """Loads a sweep or compare CSV back into a frame."""
    df = pd.read_csv(path)
    missing = [column for column in SWEEP_COLUMNS if column not in df.columns]
    if missing:
        raise ValueError(f"{path} is missing sweep columns {missing}")
    return df

# --- Plotting ---

def create_k_plot(df, title="LG statistic K against evolution angle"):
    """K per engine against theta, with the macrorealist bound as a dashed line."""
    fig = px.line(
        df,
        x="theta",
        y="k",
        color="engine",
        title=title,
        labels={"theta": "θ (rad)", "k": "K"},
        height=500,
    )
    fig.add_hline(y=LG_BOUND, line_dash="dash", annotation_text="K = 1")
    return fig


def create_trend_plot(df, x, features, title):
    """Multi-column line plot over ``x``."""
    df_plot = df.melt(id_vars=x, value_vars=features, var_name="Quantity", value_name="Value")
    fig = px.line(df_plot, x=x, y="Value", color="Quantity", title=title, height=500)
    fig.update_layout(xaxis_title=x, yaxis_title="Value")
    return fig


def write_svg(fig, path):
    """Static SVG export through kaleido; export failures surface as OSError."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        fig.write_image(str(path), format="svg")
    except (ImportError, ValueError, RuntimeError) as exc:
        raise OSError(f"SVG export to {path} failed: {exc}") from exc
    logger.debug("wrote figure to %s", path)
    return path
