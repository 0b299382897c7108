import { describe, expect, it } from 'vitest';

import { VERDICT_OPTIONS } from '../src/verdicts.js';

describe('verdict options', () => {
  it('offers exactly Same, MaybeSame, NotSame on keys 1, 2, 3', () => {
    expect(VERDICT_OPTIONS.map((o) => o.verdict)).toEqual(['Same', 'MaybeSame', 'NotSame']);
    expect(VERDICT_OPTIONS.map((o) => o.key)).toEqual(['1', '2', '3']);
  });

  it('shows the agreed option wording verbatim', () => {
    expect(VERDICT_OPTIONS[0].label).toBe(
      'The same meaning: I believe these three sentences have the same meaning.',
    );
    expect(VERDICT_OPTIONS[1].label).toBe(
      'Maybe the same meaning: Maybe these three sentences have the same meaning, ' +
        'but I might be wrong because of some reasons, for example, some rephrased ' +
        'words might not be appropriate for the context.',
    );
    expect(VERDICT_OPTIONS[2].label).toBe(
      'Not the same meaning: I am sure that these three sentences do not have the same meaning.',
    );
  });
});
