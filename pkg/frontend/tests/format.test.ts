import { describe, expect, it } from 'vitest';

import { formatMinor, headerLabel, minorToDecimal } from '../src/format.js';

describe('formatMinor', () => {
  it('renders 9000 minor EUR as "90,00 €" in the comma locale', () => {
    expect(formatMinor(9000, 'EUR', 'comma')).toBe('90,00 €');
  });

  it('renders 9000 minor EUR as "90.00 €" in the dot locale', () => {
    expect(formatMinor(9000, 'EUR', 'dot')).toBe('90.00 €');
  });

  it('defaults to the comma locale', () => {
    expect(formatMinor(9000, 'EUR')).toBe('90,00 €');
  });

  it('groups thousands with the locale separator', () => {
    expect(formatMinor(123456789, 'EUR', 'comma')).toBe('1.234.567,89 €');
    expect(formatMinor(123456789, 'EUR', 'dot')).toBe('1,234,567.89 €');
  });

  it('keeps the sign ahead of the grouped digits', () => {
    expect(formatMinor(-4250, 'EUR', 'comma')).toBe('-42,50 €');
    expect(formatMinor(-123456789, 'USD', 'dot')).toBe('-1,234,567.89 $');
  });

  it('pads cents below ten', () => {
    expect(formatMinor(5, 'EUR', 'comma')).toBe('0,05 €');
  });

  it('falls back to the currency code when no symbol is known', () => {
    expect(formatMinor(123400, 'CHF', 'comma')).toBe('1.234,00 CHF');
  });

  it('omits the suffix for mixed-currency results', () => {
    expect(formatMinor(9000, '', 'comma')).toBe('90,00');
  });
});

describe('minorToDecimal', () => {
  it('writes a dot decimal without grouping, matching the CSV export', () => {
    expect(minorToDecimal(9000)).toBe('90.00');
    expect(minorToDecimal(123456789)).toBe('1234567.89');
    expect(minorToDecimal(-4250)).toBe('-42.50');
    expect(minorToDecimal(5)).toBe('0.05');
    expect(minorToDecimal(0)).toBe('0.00');
  });
});

describe('headerLabel', () => {
  it('joins multi-level headers and names the empty tuple ALL', () => {
    expect(headerLabel(['ACME', 'BANK ALPHA'])).toBe('ACME / BANK ALPHA');
    expect(headerLabel(['2015-11'])).toBe('2015-11');
    expect(headerLabel([])).toBe('ALL');
  });
});
