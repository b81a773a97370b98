// JSON shapes of the HTTP API. Field names match the wire format exactly.

export interface PivotFilter {
  level: string;
  members: string[];
}

export interface PivotRequest {
  measure: string;
  aggregator: string;
  row_levels: string[];
  col_levels: string[];
  filters: PivotFilter[];
  date_from: string | null; // ISO date or null = table edge
  date_to: string | null;
  time_grain: string;
}

export interface PivotResult {
  measure: string;
  aggregator: string;
  time_grain: string;
  currency_code: string; // "" when the scope holds no accounts
  row_levels: string[];
  col_levels: string[];
  row_headers: string[][];
  col_headers: string[][];
  cells: (number | null)[][]; // integer minor units
  row_totals: (number | null)[];
  col_totals: (number | null)[];
  grand_total: number | null;
}

export interface PivotResponse {
  snapshot_id: number;
  query: PivotRequest;
  result: PivotResult;
}

export interface Hierarchy {
  name: string;
  levels: string[];
}

export interface LevelInfo {
  dimension: 'account' | 'time';
  members: string[];
}

export interface Metadata {
  snapshot_id: number;
  store_digest: string;
  measures: string[];
  aggregators: string[];
  time_grains: string[];
  hierarchies: { account: Hierarchy[]; time: Hierarchy[] };
  levels: Record<string, LevelInfo>;
  date_range: { first: string; last: string };
}

export interface RefreshResponse {
  snapshot_id: number;
  etl: Record<string, unknown>;
}

export interface ApiErrorBody {
  error: string;
  message: string;
  field?: string;
  snapshot_id?: number;
}
