// Explorer state and the navigation rules that keep every state
// serializable into a request the service will accept.

import type { Metadata, PivotFilter, PivotRequest, PivotResponse } from './types.js';

export interface ExplorerState {
  measure: string;
  aggregator: string;
  rowLevels: string[];
  colLevels: string[];
  filters: PivotFilter[];
  dateFrom: string | null;
  dateTo: string | null;
  timeGrain: string;
  lastResponse: PivotResponse | null;
  snapshotId: number | null;
}

// one step finer per drill; week sits in its own hierarchy and drills to day
const DRILL_CHILD: Record<string, string | null> = {
  year: 'semester',
  semester: 'quarter',
  quarter: 'month',
  month: 'day',
  week: 'day',
  day: null,
};

export function initialState(meta: Metadata): ExplorerState {
  const accountHierarchy = meta.hierarchies.account[0];
  const leaf = accountHierarchy ? accountHierarchy.levels[accountHierarchy.levels.length - 1] : undefined;
  const grain = meta.time_grains.includes('month') ? 'month' : meta.time_grains[0] ?? 'day';
  // converted measures aggregate across any account mix; original-currency
  // measures reject mixed scopes, so they make a poor first screen
  const measure = meta.measures.find((m) => m.endsWith('_eur')) ?? meta.measures[0] ?? '';
  return {
    measure,
    aggregator: meta.aggregators[0] ?? '',
    rowLevels: leaf ? [leaf] : [],
    colLevels: [grain],
    filters: [],
    dateFrom: null,
    dateTo: null,
    timeGrain: grain,
    lastResponse: null,
    snapshotId: meta.snapshot_id,
  };
}

export function buildRequest(state: ExplorerState): PivotRequest {
  return {
    measure: state.measure,
    aggregator: state.aggregator,
    row_levels: [...state.rowLevels],
    col_levels: [...state.colLevels],
    filters: state.filters.map((f) => ({ level: f.level, members: [...f.members] })),
    date_from: state.dateFrom,
    date_to: state.dateTo,
    time_grain: state.timeGrain,
  };
}

/** Replace the axis assignments; a level never sits on both axes. */
export function assignAxes(state: ExplorerState, rows: string[], cols: string[]): ExplorerState {
  const rowSet = dedupe(rows);
  const colSet = dedupe(cols).filter((level) => !rowSet.includes(level));
  return { ...state, rowLevels: rowSet, colLevels: colSet };
}

/** Change the time grain, renaming any time level currently on an axis. */
export function setGrain(state: ExplorerState, grain: string): ExplorerState {
  const rename = (levels: string[]) =>
    levels.map((level) => (level === state.timeGrain ? grain : level));
  return {
    ...state,
    timeGrain: grain,
    rowLevels: rename(state.rowLevels),
    colLevels: rename(state.colLevels),
  };
}

export function addFilter(state: ExplorerState, level: string, members: string[]): ExplorerState {
  const kept = state.filters.filter((f) => f.level !== level);
  return { ...state, filters: [...kept, { level, members: [...members] }] };
}

export function clearFilter(state: ExplorerState, level: string): ExplorerState {
  return { ...state, filters: state.filters.filter((f) => f.level !== level) };
}

export interface CellRef {
  row: number;
  col: number;
}

/**
 * Drill into the period a cell sits in: one grain finer, sliced to the
 * activated member. Returns null when there is nothing to drill
 * (day grain already, or no time level on an axis).
 */
export function drillDown(state: ExplorerState, cell: CellRef): ExplorerState | null {
  const response = state.lastResponse;
  if (!response) return null;
  const child = DRILL_CHILD[state.timeGrain] ?? null;
  if (child === null) return null;

  const rowPos = state.rowLevels.indexOf(state.timeGrain);
  const colPos = state.colLevels.indexOf(state.timeGrain);
  let member: string | undefined;
  if (rowPos >= 0) {
    member = response.result.row_headers[cell.row]?.[rowPos];
  } else if (colPos >= 0) {
    member = response.result.col_headers[cell.col]?.[colPos];
  }
  if (member === undefined) return null;

  const rename = (levels: string[]) =>
    levels.map((level) => (level === state.timeGrain ? child : level));
  const next = addFilter(state, state.timeGrain, [member]);
  return {
    ...next,
    timeGrain: child,
    rowLevels: rename(state.rowLevels),
    colLevels: rename(state.colLevels),
  };
}

/** Back stack for exploration steps. */
export class History {
  private stack: ExplorerState[] = [];

  push(state: ExplorerState): void {
    this.stack.push(state);
    if (this.stack.length > 100) this.stack.shift();
  }

  back(): ExplorerState | null {
    return this.stack.pop() ?? null;
  }

  get depth(): number {
    return this.stack.length;
  }
}

function dedupe(levels: string[]): string[] {
  return levels.filter((level, i) => levels.indexOf(level) === i);
}
