"""CSV and markdown emitters with fixed numeric formatting.

Seconds carry 3 decimals, dB values 2, BER 6 significant digits in
scientific notation. Files are written to a temporary name and renamed so a
reader never sees a partial file.
"""
from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from .access import access_stats
from .hybrid import HOP_NAMES, HYBRID
from .linkbudget import Technology, half_power_beamwidth, system_noise_temperature
from .scenario import ChainStudy, Scenario, SizeResult

ACCESS_INTERVAL_COLUMNS = ["pair", "start_s", "stop_s", "duration_s"]
ACCESS_STATS_COLUMNS = ["pair", "count", "min_s", "mean_s", "max_s", "sum_s"]
LINK_METRIC_COLUMNS = [
    "t_s", "hop", "technology", "distance_km", "fspl_db", "pr_dbw", "snr_db", "ebn0_db", "ber", "delay_s",
]
CHAIN_SUMMARY_COLUMNS = [
    "pattern", "chain_access_s", "bottleneck_rate_mbps", "mean_e2e_delay_s", "mean_e2e_ber",
    "volume_e2l_gb", "volume_l2g_gb", "volume_g2m_gb",
]


def sec(x) -> str:
    return f"{float(x):.3f}"


def db(x) -> str:
    return f"{float(x):.2f}"


def sci(x) -> str:
    return f"{float(x):.5e}"


def _opt(x, fmt=sec) -> str:
    return "" if x is None else fmt(x)


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)  # mkstemp creates 0600
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _access_sets(results: Sequence[SizeResult]):
    for res in results:
        for pair, ivs in res.pairs.items():
            yield f"{res.label}:{pair}", ivs
        for hop in HOP_NAMES:
            yield f"{res.label}:{hop}", res.hops[hop]
        yield f"{res.label}:CHAIN", res.chain


def access_interval_rows(results: Sequence[SizeResult]) -> list[list[str]]:
    return [
        [label, sec(iv.start), sec(iv.stop), sec(iv.duration)]
        for label, ivs in _access_sets(results)
        for iv in ivs
    ]


def access_stats_rows(results: Sequence[SizeResult]) -> list[list[str]]:
    rows = []
    for label, ivs in _access_sets(results):
        st = access_stats(ivs)
        rows.append([label, str(st.count), _opt(st.min), _opt(st.mean), _opt(st.max), sec(st.sum)])
    return rows


def link_metric_rows(study: ChainStudy) -> list[list[str]]:
    t, _ = study.samples
    metrics = study.metrics
    rows = []
    for k in range(t.size):
        for hop in HOP_NAMES:
            for tech in (Technology.RF, Technology.FSO):
                m = metrics[hop][tech]
                rows.append([
                    sec(t[k]), hop, tech.value, sec(m.distance[k]), db(m.fspl[k]), db(m.received_power[k]),
                    db(m.snr[k]), db(m.ebn0[k]), sci(m.ber[k]), f"{float(m.delay[k]):.6f}",
                ])
    return rows


def chain_summary_rows(study: ChainStudy) -> list[list[str]]:
    rows = []
    for pattern, rep in study.reports.items():
        ber = rep.mean_e2e_ber
        delay = rep.mean_e2e_delay
        rows.append([
            pattern,
            sec(rep.chain_access_s),
            f"{rep.bottleneck_rate_mbps:.3f}",
            "" if math.isnan(delay) else f"{delay:.6f}",
            "" if math.isnan(ber) else sci(ber),
            f"{rep.volumes_gb['E2L']:.3f}",
            f"{rep.volumes_gb['L2G']:.3f}",
            f"{rep.volumes_gb['G2M']:.3f}",
        ])
    return rows


def write_access(out: Path, results: Sequence[SizeResult]) -> list[Path]:
    out = Path(out)
    a = out / "access_intervals.csv"
    b = out / "access_stats.csv"
    write_atomic(a, _csv_text(ACCESS_INTERVAL_COLUMNS, access_interval_rows(results)))
    write_atomic(b, _csv_text(ACCESS_STATS_COLUMNS, access_stats_rows(results)))
    return [a, b]


def write_link_metrics(out: Path, study: ChainStudy) -> Path:
    path = Path(out) / "link_metrics.csv"
    write_atomic(path, _csv_text(LINK_METRIC_COLUMNS, link_metric_rows(study)))
    return path


def write_chain_summary(out: Path, study: ChainStudy) -> Path:
    path = Path(out) / "chain_summary.csv"
    write_atomic(path, _csv_text(CHAIN_SUMMARY_COLUMNS, chain_summary_rows(study)))
    return path


# --------------------------------------------------------------------------
# Human-readable tables
# --------------------------------------------------------------------------


def _md_table(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines)


def access_table(results: Sequence[SizeResult], duration: float) -> str:
    rows = []
    for res in results:
        e2l = res.stats("E2L")
        chain = res.stats("CHAIN")
        rows.append([
            f"{res.planes} by {res.sats_per_plane}", str(e2l.count), _opt(e2l.min, "{:.2f}".format),
            _opt(e2l.mean, "{:.2f}".format), _opt(e2l.max, "{:.2f}".format), f"{e2l.sum:.2f}",
            f"{100 * e2l.sum / duration:.2f}", str(chain.count), f"{100 * chain.sum / duration:.2f}",
        ])
    return _md_table(
        ["Constellation", "E2L count", "Min (s)", "Mean (s)", "Max (s)", "Sum (s)", "E2L %", "Chain count", "Chain %"],
        rows,
    )


def link_table(scenario: Scenario, study: ChainStudy) -> str:
    """Per-hop inputs and the BER/distance/delay statistics over the chain samples."""
    rows = []
    metrics = study.metrics
    for hop in scenario.hops:
        for tech in (Technology.RF, Technology.FSO):
            tx, rx, _ = hop.link(tech)
            if metrics:
                m = metrics[hop.name][tech]
                ber = np.asarray(m.ber)
                ber_cols = [sci(ber.min()), sci(ber.mean()), sci(ber.max())]
                dist = [f"{np.mean(m.distance):.2f}", f"{np.mean(m.delay):.4f}", db(np.mean(m.fspl)), db(np.mean(m.snr))]
            else:
                ber_cols = ["", "", ""]
                dist = ["", "", "", ""]
            beam = f"{half_power_beamwidth(tx.gain_db):.2f}/{half_power_beamwidth(rx.gain_db):.2f}" if tech is Technology.RF else ""
            rows.append([
                hop.name, tech.value, f"{tx.frequency_ghz:g}", f"{tx.gain_db:.2f}/{rx.gain_db:.2f}", beam,
                f"{tx.data_rate_mbps:g}", tx.modulation.value,
                f"{system_noise_temperature(rx.noise_figure_db, rx.noise_temperature_k):.1f}",
                *ber_cols, *dist,
            ])
    return _md_table(
        ["Hop", "Tech", "Freq (GHz)", "Gain Tx/Rx (dB)", "Beamwidth Tx/Rx (deg)", "Rate (Mbps)", "Modulation",
         "T_sys (K)", "BER min", "BER mean", "BER max", "Mean dist (km)", "Mean delay (s)", "Mean FSPL (dB)",
         "Mean SNR (dB)"],
        rows,
    )


def chain_table(study: ChainStudy) -> str:
    return _md_table(CHAIN_SUMMARY_COLUMNS, chain_summary_rows(study))


def write_summary(out: Path, scenario: Scenario, results: Sequence[SizeResult], study: ChainStudy) -> Path:
    t, _ = study.samples
    hybrid = study.reports[HYBRID]
    switched = {h: int(np.sum(hybrid.selected_fso[h])) for h in HOP_NAMES}
    parts = [
        f"# LunarComm scenario report: {scenario.name}",
        "",
        f"Epoch {scenario.epoch.to_datetime().isoformat()}, duration {scenario.duration:.0f} s, "
        f"grid step {scenario.step:g} s, refinement {scenario.refine_tol:g} s.",
        "",
        "## Earth-to-LEO access by constellation size",
        "",
        access_table(results, scenario.duration),
        "",
        f"## Link budgets over the {study.access.label} chain windows",
        "",
        f"{t.size} chain samples; link_metrics.csv holds {t.size * len(HOP_NAMES) * 2} rows "
        f"(samples x 3 hops x 2 technologies).",
        "",
        link_table(scenario, study),
        "",
        "## Chain patterns",
        "",
        chain_table(study),
        "",
        f"HYBRID selects FSO when its BER <= {scenario.policy.ber_threshold:g} "
        f"({scenario.policy.prefer.value}); FSO samples per hop: "
        + ", ".join(f"{h} {switched[h]}/{t.size}" for h in HOP_NAMES)
        + ".",
        "",
        "Data volumes use decimal units (Mb / 8 / 1000 = GB) at each hop's selected rate.",
        "",
    ]
    path = Path(out) / "summary.md"
    write_atomic(path, "\n".join(parts))
    return path
