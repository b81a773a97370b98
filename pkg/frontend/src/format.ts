// Display formatting. Amounts arrive as integer minor units (cents) and
// are never recomputed here — only rendered.

export type Locale = 'comma' | 'dot';

const SYMBOLS: Record<string, string> = {
  EUR: '€',
  USD: '$',
  GBP: '£',
};

function groupThousands(digits: string, separator: string): string {
  let out = '';
  for (let i = 0; i < digits.length; i++) {
    const fromEnd = digits.length - i;
    if (i > 0 && fromEnd % 3 === 0) out += separator;
    out += digits[i];
  }
  return out;
}

/** 9000 minor EUR -> "90,00 €" (comma locale) / "90.00 €" (dot locale). */
export function formatMinor(minor: number, currency: string, locale: Locale = 'comma'): string {
  const sign = minor < 0 ? '-' : '';
  const abs = Math.abs(minor);
  const units = Math.trunc(abs / 100).toString();
  const cents = (abs % 100).toString().padStart(2, '0');
  const decimal = locale === 'comma' ? ',' : '.';
  const grouping = locale === 'comma' ? '.' : ',';
  const amount = `${sign}${groupThousands(units, grouping)}${decimal}${cents}`;
  const suffix = SYMBOLS[currency] ?? currency;
  return suffix ? `${amount} ${suffix}` : amount;
}

/** Plain minor-units -> "1234.56" (dot decimal, no grouping); used for CSV. */
export function minorToDecimal(minor: number): string {
  const sign = minor < 0 ? '-' : '';
  const abs = Math.abs(minor);
  return `${sign}${Math.trunc(abs / 100)}.${(abs % 100).toString().padStart(2, '0')}`;
}

/** Header tuple -> display label; the empty tuple is the all-members bucket. */
export function headerLabel(header: string[]): string {
  return header.length ? header.join(' / ') : 'ALL';
}
