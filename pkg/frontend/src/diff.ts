// Label-set comparison for the adjudication view.

export interface LabelDiff {
  common: string[];
  onlyA: string[];
  onlyB: string[];
}

export function labelDiff(a: string[], b: string[]): LabelDiff {
  const setA = new Set(a);
  const setB = new Set(b);
  return {
    common: [...setA].filter((c) => setB.has(c)).sort(),
    onlyA: [...setA].filter((c) => !setB.has(c)).sort(),
    onlyB: [...setB].filter((c) => !setA.has(c)).sort(),
  };
}
