/**
 * Typed client for the model service. The UI never computes a value
 * locally: everything rendered comes back through these calls.
 */

export interface WalkRow {
  sheetname: string;
  name: string;
  value: string;
  formula: string;
}

export interface CurrentRow extends WalkRow {
  formula_a1?: string;
}

export interface CellView {
  cell: string;
  precedents: WalkRow[];
  current: CurrentRow;
  dependents: WalkRow[];
}

export interface InputCell {
  label: string;
  cell: string;
  value: string;
}

export interface SheetSummary {
  name: string;
  role: string;
  first_data_row: number;
  last_data_row: number;
  columns: { letter: string; name: string | null }[];
  named_cells: Record<string, string>;
}

export interface WorkbookSummary {
  name: string;
  version: number;
  revision: number;
  sheets: SheetSummary[];
  inputs: InputCell[];
}

export interface DeltaChange {
  cell: string;
  label: string;
  before: string;
  after: string;
}

export interface HistoryRecord {
  version: number;
  revision: number;
  description: string;
  modified_by: string;
  modified_on: string;
  comments: { text: string; user: string; at: string }[];
}

export type Direction = 'into-precedent' | 'into-dependent';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

export class ApiClient {
  constructor(
    private readonly base = '',
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === 'string') detail = body.detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  workbook(): Promise<WorkbookSummary> {
    return this.request('/api/workbook');
  }

  cell(sheet: string, addr: string): Promise<CellView> {
    return this.request(`/api/cells/${encodeURIComponent(sheet)}/${encodeURIComponent(addr)}`);
  }

  createSession(cell: string): Promise<{ id: string; view: CellView }> {
    return this.post('/api/sessions', { cell });
  }

  step(id: string, direction: Direction, index: number): Promise<CellView> {
    return this.post(`/api/sessions/${id}/step`, { direction, index });
  }

  back(id: string): Promise<CellView> {
    return this.post(`/api/sessions/${id}/back`, {});
  }

  async trail(id: string): Promise<string> {
    const response = await this.fetchImpl(`${this.base}/api/sessions/${id}/trail`);
    if (!response.ok) throw new ApiError(response.status, response.statusText);
    return response.text();
  }

  whatif(overrides: Record<string, unknown>): Promise<{ changes: DeltaChange[] }> {
    return this.post('/api/whatif', { overrides });
  }

  history(version?: number): Promise<{ records: HistoryRecord[] }> {
    const query = version === undefined ? '' : `?version=${version}`;
    return this.request(`/api/history${query}`);
  }

  compile(text: string, host: string): Promise<{ a1: string; array: boolean }> {
    return this.post('/api/compile', { text, host });
  }

  decompile(text: string): Promise<{ named: string }> {
    return this.post('/api/decompile', { text });
  }
}
