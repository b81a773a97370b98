// Browser wiring: DOM in, DOM out. All behaviour worth testing lives in
// the pure modules (state, renderModel, format, api).

import { ApiClient, ApiError } from './api.js';
import type { Locale } from './format.js';
import { buildCsv, errorBanner, gridModel, renderGrid } from './renderModel.js';
import {
  addFilter,
  assignAxes,
  buildRequest,
  drillDown,
  History,
  initialState,
  setGrain,
  type ExplorerState,
} from './state.js';
import type { Metadata } from './types.js';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function fillSelect(select: HTMLSelectElement, options: string[], selected: string): void {
  select.innerHTML = '';
  for (const value of options) {
    const option = document.createElement('option');
    option.value = value;
    option.textContent = value;
    option.selected = value === selected;
    select.appendChild(option);
  }
}

class Explorer {
  private client!: ApiClient;
  private meta!: Metadata;
  private state!: ExplorerState;
  private readonly history = new History();
  private locale: Locale = 'comma';

  async connect(base: string, token: string): Promise<void> {
    this.client = new ApiClient(base, token);
    this.meta = await this.client.metadata();
    this.state = initialState(this.meta);
    this.buildControls();
    await this.run();
  }

  private buildControls(): void {
    fillSelect(el('measure'), this.meta.measures, this.state.measure);
    fillSelect(el('aggregator'), this.meta.aggregators, this.state.aggregator);
    fillSelect(el('grain'), this.meta.time_grains, this.state.timeGrain);
    const accountLevels = this.meta.hierarchies.account.flatMap((h) => h.levels);
    fillSelect(el('rows'), [...accountLevels, this.state.timeGrain], this.state.rowLevels[0] ?? '');
    fillSelect(el('cols'), [...accountLevels, this.state.timeGrain], this.state.colLevels[0] ?? '');
    el<HTMLSpanElement>('snapshot').textContent = `snapshot ${this.meta.snapshot_id}`;
  }

  private readControls(): void {
    this.state = {
      ...this.state,
      measure: el<HTMLSelectElement>('measure').value,
      aggregator: el<HTMLSelectElement>('aggregator').value,
      dateFrom: el<HTMLInputElement>('date-from').value || null,
      dateTo: el<HTMLInputElement>('date-to').value || null,
    };
    this.state = setGrain(this.state, el<HTMLSelectElement>('grain').value);
    this.state = assignAxes(
      this.state,
      [el<HTMLSelectElement>('rows').value].filter(Boolean),
      [el<HTMLSelectElement>('cols').value].filter(Boolean),
    );
    const filterText = el<HTMLInputElement>('filter').value.trim();
    if (filterText) {
      const [level, members] = filterText.split('=', 2);
      if (level && members) this.state = addFilter(this.state, level.trim(), members.split(','));
    }
  }

  async run(): Promise<void> {
    try {
      const response = await this.client.pivot(buildRequest(this.state));
      if (!response) return; // superseded by a newer query
      this.state = { ...this.state, lastResponse: response, snapshotId: response.snapshot_id };
      el('grid').innerHTML = renderGrid(gridModel(response, this.locale));
      el<HTMLSpanElement>('snapshot').textContent = `snapshot ${response.snapshot_id}`;
      this.bindCells();
    } catch (err) {
      const message = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      el('grid').innerHTML = errorBanner(message);
    }
  }

  private bindCells(): void {
    for (const cell of el('grid').querySelectorAll<HTMLTableCellElement>('td[data-row]')) {
      cell.addEventListener('dblclick', () => {
        const next = drillDown(this.state, {
          row: Number(cell.dataset.row),
          col: Number(cell.dataset.col),
        });
        if (!next) return;
        this.history.push(this.state);
        this.state = next;
        this.syncControls();
        void this.run();
      });
    }
  }

  back(): void {
    const previous = this.history.back();
    if (!previous) return;
    this.state = previous;
    this.syncControls();
    void this.run();
  }

  private syncControls(): void {
    el<HTMLSelectElement>('grain').value = this.state.timeGrain;
    this.buildControls();
  }

  setLocale(locale: Locale): void {
    this.locale = locale;
    if (this.state?.lastResponse) {
      el('grid').innerHTML = renderGrid(gridModel(this.state.lastResponse, this.locale));
      this.bindCells();
    }
  }

  downloadCsv(): void {
    if (!this.state?.lastResponse) return;
    const blob = new Blob([buildCsv(this.state.lastResponse.result)], { type: 'text/csv' });
    const link = document.createElement('a');
    link.href = URL.createObjectURL(blob);
    link.download = 'pivot.csv';
    link.click();
    URL.revokeObjectURL(link.href);
  }

  async refresh(): Promise<void> {
    try {
      const response = await this.client.refresh();
      el<HTMLSpanElement>('snapshot').textContent = `snapshot ${response.snapshot_id}`;
      await this.run();
    } catch (err) {
      const message = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      el('grid').innerHTML = errorBanner(message);
    }
  }

  update(): void {
    this.history.push(this.state);
    this.readControls();
    void this.run();
  }
}

const explorer = new Explorer();

el('connect').addEventListener('click', () => {
  const base = el<HTMLInputElement>('base-url').value || window.location.origin;
  const token = el<HTMLInputElement>('token').value;
  explorer.connect(base, token).catch((err) => {
    el('grid').innerHTML = errorBanner(err instanceof Error ? err.message : String(err));
  });
});
el('apply').addEventListener('click', () => explorer.update());
el('back').addEventListener('click', () => explorer.back());
el('download').addEventListener('click', () => explorer.downloadCsv());
el('refresh').addEventListener('click', () => void explorer.refresh());
el('locale').addEventListener('change', () => {
  explorer.setLocale(el<HTMLSelectElement>('locale').value as Locale);
});
