/**
 * The what-if panel: editable Input-sheet named cells, a submit that
 * shows which cells changed, and a named/A1 toggle on a changed cell's
 * formula. Every string shown is taken verbatim from service responses;
 * nothing is recomputed client-side.
 */

import { ApiClient, CellView, DeltaChange, InputCell } from './api';
import { clear, el } from './dom';

function parseOverride(text: string): number | string | boolean {
  const trimmed = text.trim();
  if (/^-?\d+(\.\d+)?$/.test(trimmed)) return Number(trimmed);
  if (/^true$/i.test(trimmed)) return true;
  if (/^false$/i.test(trimmed)) return false;
  return trimmed;
}

export class WhatIfPanel {
  private inputs: InputCell[] = [];
  private edits = new Map<string, string>();
  private delta: DeltaChange[] | null = null;
  private formulaView: { cell: CellView; showA1: boolean } | null = null;
  private error = '';
  private pending: Promise<void> = Promise.resolve();

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {
    this.render();
  }

  idle(): Promise<void> {
    return this.pending;
  }

  private queue(task: () => Promise<void>): Promise<void> {
    const run = async () => {
      try {
        await task();
        this.error = '';
      } catch (e) {
        this.error = e instanceof Error ? e.message : String(e);
      }
      this.render();
    };
    this.pending = this.pending.then(run);
    return this.pending;
  }

  load(): Promise<void> {
    return this.queue(async () => {
      const summary = await this.api.workbook();
      this.inputs = summary.inputs;
      this.edits.clear();
      this.delta = null;
      this.formulaView = null;
    });
  }

  private dirty(): boolean {
    return this.inputs.some((input) => {
      const edited = this.edits.get(input.label);
      return edited !== undefined && edited.trim() !== input.value;
    });
  }

  submit(): Promise<void> {
    return this.queue(async () => {
      const overrides: Record<string, unknown> = {};
      for (const input of this.inputs) {
        const edited = this.edits.get(input.label);
        if (edited !== undefined && edited.trim() !== input.value) {
          overrides[input.label] = parseOverride(edited);
        }
      }
      const response = await this.api.whatif(overrides);
      this.delta = response.changes;
      this.formulaView = null;
    });
  }

  showFormula(cellId: string): Promise<void> {
    return this.queue(async () => {
      const [sheet, addr] = cellId.split('!');
      this.formulaView = { cell: await this.api.cell(sheet, addr), showA1: false };
    });
  }

  toggleFormula(): void {
    if (this.formulaView) {
      this.formulaView.showA1 = !this.formulaView.showA1;
      this.render();
    }
  }

  private render(): void {
    clear(this.root);
    if (this.error) {
      this.root.append(el('div', { class: 'error', role: 'alert' }, [this.error]));
    }

    const rows = this.inputs.map((input) => {
      const field = el('input', {
        type: 'text',
        'data-label': input.label,
        value: this.edits.get(input.label) ?? input.value,
      });
      field.addEventListener('input', () => {
        this.edits.set(input.label, field.value);
        submitButton.disabled = !this.dirty();
      });
      return el('tr', {}, [
        el('td', {}, [input.label]),
        el('td', { class: 'addr' }, [input.cell]),
        el('td', {}, [field]),
      ]);
    });

    const submitButton = el('button', { id: 'whatif-submit', type: 'button' }, ['Run what-if']);
    submitButton.disabled = !this.dirty();
    submitButton.addEventListener('click', () => void this.submit());

    this.root.append(
      el('table', { class: 'inputs' }, [
        el('thead', {}, [el('tr', {}, [el('th', {}, ['Input']), el('th', {}, ['Cell']), el('th', {}, ['Value'])])]),
        el('tbody', {}, rows),
      ]),
      submitButton,
    );

    if (this.delta !== null) {
      const deltaRows = this.delta.map((change) => {
        const tr = el('tr', { class: 'changed', 'data-cell': change.cell }, [
          el('td', {}, [change.label]),
          el('td', { class: 'before' }, [change.before]),
          el('td', { class: 'after' }, [change.after]),
        ]);
        tr.addEventListener('click', () => void this.showFormula(change.cell));
        return tr;
      });
      this.root.append(
        el('h3', {}, ['Changed cells']),
        this.delta.length
          ? el('table', { class: 'delta' }, [
              el('thead', {}, [el('tr', {}, [el('th', {}, ['Name']), el('th', {}, ['Before']), el('th', {}, ['After'])])]),
              el('tbody', {}, deltaRows),
            ])
          : el('p', { class: 'hint' }, ['No cells changed.']),
      );
    }

    if (this.formulaView) {
      const { cell, showA1 } = this.formulaView;
      const text = showA1 ? (cell.current.formula_a1 ?? '') : cell.current.formula;
      const toggle = el('button', { id: 'formula-toggle', type: 'button' }, [
        showA1 ? 'Show named form' : 'Show array formula',
      ]);
      toggle.addEventListener('click', () => this.toggleFormula());
      this.root.append(
        el('div', { class: 'formula-view' }, [
          el('h3', {}, [`Formula of ${cell.current.name}`]),
          el('pre', { id: 'formula-text' }, [text]),
          toggle,
        ]),
      );
    }
  }
}
