// Pure presentation: turn a pivot response into a grid model and the
// grid model into static HTML. Nothing here recomputes an amount —
// every figure is formatted straight from the integer minor units the
// service returned.

import { formatMinor, headerLabel, minorToDecimal, type Locale } from './format.js';
import type { PivotResponse, PivotResult } from './types.js';

export interface GridModel {
  title: string;
  cornerLabel: string;
  colLabels: string[];
  rowLabels: string[];
  cells: string[][]; // formatted, '' for empty
  rowTotals: string[];
  colTotals: string[];
  grandTotal: string;
  snapshotId: number;
}

export function gridModel(response: PivotResponse, locale: Locale = 'comma'): GridModel {
  const r = response.result;
  checkShape(r);
  const fmt = (minor: number | null): string =>
    minor === null ? '' : formatMinor(minor, r.currency_code, locale);
  return {
    title: `${r.measure} ${r.aggregator} by ${r.time_grain}`,
    cornerLabel: `${axisLabel(r.row_levels)} \\ ${axisLabel(r.col_levels)}`,
    colLabels: r.col_headers.map(headerLabel),
    rowLabels: r.row_headers.map(headerLabel),
    cells: r.cells.map((row) => row.map(fmt)),
    rowTotals: r.row_totals.map(fmt),
    colTotals: r.col_totals.map(fmt),
    grandTotal: fmt(r.grand_total),
    snapshotId: response.snapshot_id,
  };
}

/** Render the grid as a static HTML table (strings, no DOM). */
export function renderGrid(model: GridModel): string {
  if (model.rowLabels.length === 0 || model.colLabels.length === 0) {
    return '<p class="empty">no data in range</p>\n';
  }
  const lines: string[] = [];
  lines.push(`<table class="pivot" data-snapshot="${model.snapshotId}">`);
  lines.push(`<caption>${esc(model.title)}</caption>`);
  lines.push('<thead><tr>');
  lines.push(`<th class="corner">${esc(model.cornerLabel)}</th>`);
  for (const label of model.colLabels) lines.push(`<th scope="col">${esc(label)}</th>`);
  lines.push('<th scope="col" class="total">TOTAL</th>');
  lines.push('</tr></thead>');
  lines.push('<tbody>');
  model.rowLabels.forEach((label, i) => {
    lines.push('<tr>');
    lines.push(`<th scope="row">${esc(label)}</th>`);
    (model.cells[i] ?? []).forEach((cell, j) => {
      lines.push(`<td class="num" data-row="${i}" data-col="${j}">${esc(cell)}</td>`);
    });
    lines.push(`<td class="num total">${esc(model.rowTotals[i] ?? '')}</td>`);
    lines.push('</tr>');
  });
  lines.push('</tbody>');
  lines.push('<tfoot><tr>');
  lines.push('<th scope="row" class="total">TOTAL</th>');
  for (const cell of model.colTotals) lines.push(`<td class="num total">${esc(cell)}</td>`);
  lines.push(`<td class="num total grand">${esc(model.grandTotal)}</td>`);
  lines.push('</tr></tfoot>');
  lines.push('</table>');
  return lines.join('\n') + '\n';
}

export function errorBanner(message: string): string {
  return `<div class="banner error">${esc(message)}</div>\n`;
}

/** CSV export with the exact layout the engine's own writer uses. */
export function buildCsv(result: PivotResult): string {
  checkShape(result);
  const lines: string[] = [];
  const head = [`row\\col`, ...result.col_headers.map(headerLabel), 'TOTAL'];
  lines.push(head.map(csvField).join(','));
  result.row_headers.forEach((header, i) => {
    const cells = (result.cells[i] ?? []).map(csvMinor);
    lines.push([csvField(headerLabel(header)), ...cells, csvMinor(result.row_totals[i] ?? null)].join(','));
  });
  const foot = ['TOTAL', ...result.col_totals.map(csvMinor), csvMinor(result.grand_total)];
  lines.push(foot.join(','));
  return lines.join('\n') + '\n';
}

// The service guarantees a rectangular payload; a mismatch means the
// response was mangled in transit and must not be rendered.
function checkShape(r: PivotResult): void {
  if (r.cells.length !== r.row_headers.length || r.row_totals.length !== r.row_headers.length) {
    throw new Error('malformed pivot payload: row count mismatch');
  }
  if (r.col_totals.length !== r.col_headers.length) {
    throw new Error('malformed pivot payload: column count mismatch');
  }
  for (const row of r.cells) {
    if (row.length !== r.col_headers.length) {
      throw new Error('malformed pivot payload: ragged cell matrix');
    }
  }
}

function axisLabel(levels: string[]): string {
  return levels.length ? levels.join('/') : 'ALL';
}

function csvMinor(minor: number | null): string {
  return minor === null ? '' : minorToDecimal(minor);
}

function csvField(value: string): string {
  return /[",\n]/.test(value) ? `"${value.replace(/"/g, '""')}"` : value;
}

function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}
