// Keyboard shortcuts: digits 1-9, then 0 and '-' cover the 11 labels in
// schema order.

export const KEY_ORDER = ["1", "2", "3", "4", "5", "6", "7", "8", "9", "0", "-"];

export function labelIndexForKey(key: string): number | null {
  const idx = KEY_ORDER.indexOf(key);
  return idx === -1 ? null : idx;
}

export function keyForLabelIndex(index: number): string | null {
  return KEY_ORDER[index] ?? null;
}
