/**
 * The walker panel: one table with Precedents, Current Formula and
 * Dependents sections (Sheetname / Name / Value / Formula columns).
 * Clicking a precedent or dependent row steps the session there; Back
 * pops; Download saves the recorded trail exactly as the service
 * reports it.
 */

import { ApiClient, CellView, Direction, WalkRow } from './api';
import { clear, el } from './dom';

export class WalkerPanel {
  private sessionId: string | null = null;
  private view: CellView | null = null;
  private error = '';
  private pending: Promise<void> = Promise.resolve();

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {
    this.render();
  }

  /** Settles when every queued interaction has finished. */
  idle(): Promise<void> {
    return this.pending;
  }

  private queue(task: () => Promise<void>): Promise<void> {
    const run = async () => {
      try {
        await task();
        this.error = '';
      } catch (e) {
        // service errors surface inline; the view stays where it was
        this.error = e instanceof Error ? e.message : String(e);
      }
      this.render();
    };
    this.pending = this.pending.then(run);
    return this.pending;
  }

  open(cell: string): Promise<void> {
    return this.queue(async () => {
      const created = await this.api.createSession(cell);
      this.sessionId = created.id;
      this.view = created.view;
    });
  }

  stepTo(direction: Direction, index: number): Promise<void> {
    return this.queue(async () => {
      if (!this.sessionId) throw new Error('no session');
      this.view = await this.api.step(this.sessionId, direction, index);
    });
  }

  goBack(): Promise<void> {
    return this.queue(async () => {
      if (!this.sessionId) throw new Error('no session');
      this.view = await this.api.back(this.sessionId);
    });
  }

  /** The trail text exactly as served; the download writes these bytes. */
  async trailText(): Promise<string> {
    if (!this.sessionId) throw new Error('no session');
    return this.api.trail(this.sessionId);
  }

  private downloadTrail(): Promise<void> {
    return this.queue(async () => {
      const text = await this.trailText();
      const blob = new Blob([text], { type: 'text/plain' });
      const anchor = el('a', { download: 'trail.txt' });
      anchor.href = URL.createObjectURL(blob);
      anchor.click();
      URL.revokeObjectURL(anchor.href);
    });
  }

  private row(kind: string, data: WalkRow, onClick?: () => void): HTMLTableRowElement {
    const tr = el('tr', { class: kind }, [
      el('td', {}, [data.sheetname]),
      el('td', {}, [data.name]),
      el('td', { class: 'value' }, [data.value]),
      el('td', { class: 'formula' }, [data.formula]),
    ]);
    if (onClick) {
      tr.classList.add('steppable');
      tr.addEventListener('click', onClick);
    }
    return tr;
  }

  private section(label: string): HTMLTableRowElement {
    return el('tr', { class: 'section' }, [el('td', { colspan: '4' }, [label])]);
  }

  private render(): void {
    clear(this.root);
    if (this.error) {
      this.root.append(el('div', { class: 'error', role: 'alert' }, [this.error]));
    }
    if (!this.view) {
      this.root.append(el('p', { class: 'hint' }, ['Open a cell to start walking.']));
      return;
    }
    const body = el('tbody');
    body.append(this.section('Precedents'));
    this.view.precedents.forEach((row, index) => {
      body.append(this.row('precedent', row, () => void this.stepTo('into-precedent', index)));
    });
    body.append(this.section('Current Formula'));
    body.append(this.row('current', this.view.current));
    body.append(this.section('Dependents'));
    this.view.dependents.forEach((row, index) => {
      body.append(this.row('dependent', row, () => void this.stepTo('into-dependent', index)));
    });

    const table = el('table', { class: 'walker' }, [
      el('thead', {}, [
        el('tr', {}, [
          el('th', {}, ['Sheetname']),
          el('th', {}, ['Name']),
          el('th', {}, ['Value']),
          el('th', {}, ['Formula']),
        ]),
      ]),
      body,
    ]);

    const backButton = el('button', { id: 'walker-back', type: 'button' }, ['Back']);
    backButton.addEventListener('click', () => void this.goBack());
    const downloadButton = el('button', { id: 'walker-download', type: 'button' }, ['Download trail']);
    downloadButton.addEventListener('click', () => void this.downloadTrail());

    this.root.append(
      el('div', { class: 'toolbar' }, [
        el('span', { class: 'cursor' }, [this.view.cell]),
        backButton,
        downloadButton,
      ]),
      table,
    );
  }
}
