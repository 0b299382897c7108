export type Verdict = 'Same' | 'MaybeSame' | 'NotSame';

export interface VerdictOption {
  verdict: Verdict;
  key: '1' | '2' | '3';
  label: string;
}

// The exact wording shown to annotators. Do not edit casually: judgments
// collected under different wording are not comparable.
export const VERDICT_OPTIONS: readonly VerdictOption[] = [
  {
    verdict: 'Same',
    key: '1',
    label: 'The same meaning: I believe these three sentences have the same meaning.',
  },
  {
    verdict: 'MaybeSame',
    key: '2',
    label:
      'Maybe the same meaning: Maybe these three sentences have the same meaning, ' +
      'but I might be wrong because of some reasons, for example, some rephrased ' +
      'words might not be appropriate for the context.',
  },
  {
    verdict: 'NotSame',
    key: '3',
    label: 'Not the same meaning: I am sure that these three sentences do not have the same meaning.',
  },
];
