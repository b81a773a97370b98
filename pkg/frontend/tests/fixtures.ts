import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import type { Metadata, PivotResponse } from '../src/types.js';

const HERE = dirname(fileURLToPath(import.meta.url));

/** The checked-in wire sample shared with the golden-render script. */
export function sampleResponse(): PivotResponse {
  const raw = readFileSync(join(HERE, 'golden', 'pivot-response.json'), 'utf8');
  return JSON.parse(raw) as PivotResponse;
}

export function goldenPath(name: string): string {
  return join(HERE, 'golden', name);
}

export function sampleMetadata(): Metadata {
  return {
    snapshot_id: 3,
    store_digest: 'abc123',
    measures: ['balance_orig', 'balance_eur', 'working_orig', 'working_eur'],
    aggregators: ['SUM_CLOSING', 'AVERAGE'],
    time_grains: ['day', 'week', 'month', 'quarter', 'semester', 'year'],
    hierarchies: {
      account: [{ name: 'organization', levels: ['company', 'bank', 'account'] }],
      time: [
        { name: 'calendar', levels: ['year', 'semester', 'quarter', 'month', 'day'] },
        { name: 'weekly', levels: ['week', 'day'] },
      ],
    },
    levels: {
      company: { dimension: 'account', members: ['ACME', 'GLOBEX'] },
      bank: { dimension: 'account', members: ['BANK ALPHA', 'BANK BETA'] },
      account: { dimension: 'account', members: ['A1', 'A2', 'A3'] },
      year: { dimension: 'time', members: ['2014', '2015'] },
      month: { dimension: 'time', members: ['2014-01', '2015-12'] },
    },
    date_range: { first: '2014-01-01', last: '2015-12-31' },
  };
}
