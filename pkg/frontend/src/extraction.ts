// Extraction form logic. Validation happens before any request leaves the
// browser; in particular a budget below the number of sources is rejected
// client-side.

import { ApiClient, ExtractResponse } from './api.js';

export interface ExtractionFormState {
  sourcesText: string;
  budgetText: string;
  pending: boolean;
  error: string | null;
  result: ExtractResponse | null;
}

export function parseSources(text: string): number[] {
  const out: number[] = [];
  for (const piece of text.split(',')) {
    const item = piece.trim();
    if (!item) continue;
    if (!/^\d+$/.test(item)) {
      throw new Error(`source ${JSON.stringify(item)} is not a node id`);
    }
    out.push(Number(item));
  }
  return out;
}

/** Returns an error message, or null when the form may be submitted. */
export function validateExtraction(sources: number[],
                                   budget: number): string | null {
  if (sources.length === 0) {
    return 'at least one source node is required';
  }
  if (new Set(sources).size !== sources.length) {
    return 'duplicate source nodes';
  }
  if (!Number.isInteger(budget) || budget <= 0) {
    return 'budget must be a positive integer';
  }
  if (budget < sources.length) {
    return `budget ${budget} is below the ${sources.length} sources`;
  }
  return null;
}

export class ExtractionController {
  state: ExtractionFormState = {
    sourcesText: '',
    budgetText: '30',
    pending: false,
    error: null,
    result: null,
  };

  constructor(private api: ApiClient,
              private onChange: (s: ExtractionFormState) => void = () => {}) {}

  private patch(partial: Partial<ExtractionFormState>): void {
    this.state = { ...this.state, ...partial };
    this.onChange(this.state);
  }

  setSources(text: string): void {
    this.patch({ sourcesText: text });
  }

  setBudget(text: string): void {
    this.patch({ budgetText: text });
  }

  /** Validate and, only if valid, send one extraction request. */
  async submit(datasetId: string): Promise<void> {
    let sources: number[];
    try {
      sources = parseSources(this.state.sourcesText);
    } catch (err) {
      this.patch({ error: (err as Error).message, result: null });
      return;
    }
    const budget = Number(this.state.budgetText);
    const problem = validateExtraction(sources, budget);
    if (problem !== null) {
      this.patch({ error: problem, result: null });
      return;
    }
    this.patch({ pending: true, error: null });
    try {
      const result = await this.api.extract(datasetId, { sources, budget });
      this.patch({ pending: false, result });
    } catch (err) {
      this.patch({ pending: false, error: (err as Error).message,
                   result: null });
    }
  }
}
