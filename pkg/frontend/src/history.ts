/** Version history view: revision rows grouped under version headings. */

import { ApiClient, HistoryRecord } from './api';
import { clear, el } from './dom';

export class HistoryPanel {
  private records: HistoryRecord[] = [];
  private error = '';

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {
    this.render();
  }

  async load(version?: number): Promise<void> {
    try {
      this.records = (await this.api.history(version)).records;
      this.error = '';
    } catch (e) {
      this.error = e instanceof Error ? e.message : String(e);
    }
    this.render();
  }

  private render(): void {
    clear(this.root);
    if (this.error) {
      this.root.append(el('div', { class: 'error' }, [this.error]));
      return;
    }
    const body = el('tbody');
    let version: number | null = null;
    for (const record of this.records) {
      if (record.version !== version) {
        version = record.version;
        body.append(
          el('tr', { class: 'section' }, [el('td', { colspan: '4' }, [`Version ${version}`])]),
        );
      }
      body.append(
        el('tr', {}, [
          el('td', {}, [String(record.revision)]),
          el('td', {}, [record.description]),
          el('td', {}, [record.modified_by]),
          el('td', {}, [record.modified_on]),
        ]),
      );
    }
    this.root.append(
      el('table', { class: 'history' }, [
        el('thead', {}, [
          el('tr', {}, [
            el('th', {}, ['Revision']),
            el('th', {}, ['Name']),
            el('th', {}, ['Modified By']),
            el('th', {}, ['Modified On']),
          ]),
        ]),
        body,
      ]),
    );
  }
}
