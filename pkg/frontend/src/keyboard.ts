import { VERDICT_OPTIONS, Verdict } from './verdicts.js';

// Structural subset of KeyboardEvent so the mapping is testable without a DOM.
export interface KeydownLike {
  key: string;
  ctrlKey?: boolean;
  metaKey?: boolean;
  altKey?: boolean;
  target?: { tagName?: string; isContentEditable?: boolean } | null;
}

const TYPING_TAGS = new Set(['INPUT', 'TEXTAREA', 'SELECT']);

/** Map 1/2/3 to a verdict; null when the key should not submit anything. */
export function verdictForKey(e: KeydownLike): Verdict | null {
  if (e.ctrlKey || e.metaKey || e.altKey) return null;
  const tag = e.target?.tagName;
  if (tag && TYPING_TAGS.has(tag.toUpperCase())) return null;
  if (e.target?.isContentEditable) return null;
  const option = VERDICT_OPTIONS.find((o) => o.key === e.key);
  return option ? option.verdict : null;
}
