# utils/singular_flux/export.py
"""
Export and reporting functions for verification runs

CSV tables for measures, curves and refinement series; deterministic JSON
reports; an optional formatted Excel workbook of acceptance checks.
"""

import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side

from .curves import LipCurve
from .measures import AtomicVectorMeasure
from .wasserstein import VariationProfile

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Excel formatting constants
HEADER_FONT = Font(bold=True, color="FFFFFF", size=11)
HEADER_FILL = PatternFill(start_color="366092", end_color="366092", fill_type="solid")
HEADER_ALIGNMENT = Alignment(horizontal="center", vertical="center", wrap_text=True)
THIN_BORDER = Border(
    left=Side(style='thin'),
    right=Side(style='thin'),
    top=Side(style='thin'),
    bottom=Side(style='thin')
)
ALT_ROW_FILL = PatternFill(start_color="F2F2F2", end_color="F2F2F2", fill_type="solid")
PASS_FILL = PatternFill(start_color="C6EFCE", end_color="C6EFCE", fill_type="solid")
FAIL_FILL = PatternFill(start_color="FFC7CE", end_color="FFC7CE", fill_type="solid")
MAX_SHEET_NAME = 31


# ==================== Tables ====================

def measure_to_frame(measure: AtomicVectorMeasure) -> pd.DataFrame:
    """Columns t, x1..xd, w1..wm"""
    data = {'t': measure.times}
    for k in range(measure.dim):
        data[f'x{k + 1}'] = measure.points[:, k]
    for k in range(measure.m):
        data[f'w{k + 1}'] = measure.weights[:, k]
    return pd.DataFrame(data)


def curves_to_frame(curves: Sequence[LipCurve]) -> pd.DataFrame:
    """Columns curve, s, t, x1..xd with one row per breakpoint"""
    frames = []
    for j, c in enumerate(curves):
        df = pd.DataFrame(c.points[:, 1:], columns=[f'x{k + 1}' for k in range(c.dim)])
        df.insert(0, 't', c.points[:, 0])
        df.insert(0, 's', c.breakpoints)
        df.insert(0, 'curve', j)
        frames.append(df)
    if not frames:
        return pd.DataFrame(columns=['curve', 's', 't'])
    return pd.concat(frames, ignore_index=True)


def profile_to_frame(profile: VariationProfile) -> pd.DataFrame:
    return pd.DataFrame({'t': profile.times, 'V': profile.cumulative})


def series_to_frame(levels: Sequence[int], steps: Sequence[float], values: Sequence[float]) -> pd.DataFrame:
    """Refinement series: columns level, h, value"""
    return pd.DataFrame({'level': list(levels), 'h': list(steps), 'value': list(values)})


def write_csv(df: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False)
    logger.debug(f"Wrote {len(df)} rows to {path}")
    return path


# ==================== JSON ====================

def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def dumps_report(report: Dict[str, Any]) -> str:
    """Sorted keys, two-space indentation, trailing newline"""
    return json.dumps(report, sort_keys=True, indent=2, default=_jsonable) + "\n"


def write_json(report: Dict[str, Any], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(report), encoding='utf-8')
    logger.debug(f"Wrote report to {path}")
    return path


def read_json(path: PathLike) -> Any:
    with open(path, 'r', encoding='utf-8') as handle:
        return json.load(handle)


# ==================== Excel ====================

def _summary_frame(checks: List[Dict[str, Any]]) -> pd.DataFrame:
    rows = []
    for check in checks:
        rows.append({
            'check': check.get('name', ''),
            'status': 'PASS' if check.get('pass') else 'FAIL',
            'value': check.get('value'),
            'tolerance': check.get('tol'),
            'detail': check.get('detail', ''),
        })
    return pd.DataFrame(rows, columns=['check', 'status', 'value', 'tolerance', 'detail'])


def _detail_frame(check: Dict[str, Any]) -> pd.DataFrame:
    """Flatten scalar entries of a check into key/value rows"""
    rows = []
    for key, value in sorted(check.items()):
        if isinstance(value, (list, dict)):
            value = json.dumps(value, sort_keys=True, default=_jsonable)
            if len(value) > 200:
                value = value[:197] + '...'
        rows.append({'field': key, 'value': value})
    return pd.DataFrame(rows, columns=['field', 'value'])


def _sheet_name(name: str, used: set) -> str:
    base = ''.join(ch if ch not in '[]:*?/\\' else '_' for ch in name)[:MAX_SHEET_NAME] or 'check'
    candidate, k = base, 1
    while candidate in used:
        suffix = f"_{k}"
        candidate = base[:MAX_SHEET_NAME - len(suffix)] + suffix
        k += 1
    used.add(candidate)
    return candidate


def export_to_excel(checks: List[Dict[str, Any]], path: Optional[PathLike] = None) -> io.BytesIO:
    """
    Export acceptance checks to a formatted Excel workbook

    Args:
        checks: one dict per check with at least 'name' and 'pass'
        path: optional file to write the workbook to

    Returns:
        BytesIO object containing the Excel file
    """
    output = io.BytesIO()

    try:
        with pd.ExcelWriter(output, engine='openpyxl') as writer:
            _summary_frame(checks).to_excel(writer, sheet_name='Summary', index=False)
            used = {'Summary'}
            for check in checks:
                _detail_frame(check).to_excel(writer, sheet_name=_sheet_name(str(check.get('name', 'check')), used),
                                              index=False)

            workbook = writer.book
            for sheet_name in workbook.sheetnames:
                _format_excel_sheet(workbook[sheet_name])
            _color_status(workbook['Summary'])

        output.seek(0)
        if path is not None:
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(output.getvalue())
        logger.info(f"Exported {len(checks)} checks to Excel")
        return output

    except Exception as e:
        logger.error(f"Error exporting to Excel: {e}")
        raise


def _color_status(worksheet):
    """Green/red fill on the status column of the summary sheet"""
    for row in worksheet.iter_rows(min_row=2, min_col=2, max_col=2):
        for cell in row:
            cell.fill = PASS_FILL if cell.value == 'PASS' else FAIL_FILL


def _format_excel_sheet(worksheet, freeze_row: int = 2):
    """Apply formatting to Excel worksheet"""
    # Header formatting
    for cell in worksheet[1]:
        cell.font = HEADER_FONT
        cell.fill = HEADER_FILL
        cell.alignment = HEADER_ALIGNMENT

    # Auto-adjust column widths
    for column in worksheet.columns:
        max_length = 0
        column_letter = column[0].column_letter
        for cell in column:
            if cell.value is not None:
                max_length = max(max_length, len(str(cell.value)))
        worksheet.column_dimensions[column_letter].width = min(max(max_length + 2, 10), 50)

    # Borders and alternate row colors
    for row_num, row in enumerate(worksheet.iter_rows(min_row=1), 1):
        for cell in row:
            cell.border = THIN_BORDER
            if row_num > 1 and row_num % 2 == 0:
                cell.fill = ALT_ROW_FILL

    worksheet.freeze_panes = f'A{freeze_row}'
