import { ApiClient } from './api';
import { clear, el } from './dom';
import { HistoryPanel } from './history';
import { WalkerPanel } from './walker';
import { WhatIfPanel } from './whatif';

const api = new ApiClient();

function mount(): void {
  const app = document.getElementById('app');
  if (!app) return;
  clear(app);

  const tabs = el('nav', { class: 'tabs' });
  const title = el('h1', {}, ['Model workbench']);
  const panelHost = el('main', {});
  app.append(title, tabs, panelHost);

  const walkerRoot = el('section', { id: 'walker' });
  const whatifRoot = el('section', { id: 'whatif' });
  const historyRoot = el('section', { id: 'history' });

  const walkerTools = el('div', { class: 'toolbar' });
  const cellInput = el('input', { type: 'text', placeholder: 'SEC_GTEEADJ!M5', id: 'walker-cell' });
  const openButton = el('button', { type: 'button' }, ['Open']);
  walkerTools.append(cellInput, openButton);
  const walkerPanelRoot = el('div', {});
  walkerRoot.append(walkerTools, walkerPanelRoot);

  const walker = new WalkerPanel(walkerPanelRoot, api);
  const whatif = new WhatIfPanel(whatifRoot, api);
  const history = new HistoryPanel(historyRoot, api);

  openButton.addEventListener('click', () => {
    if (cellInput.value.trim()) void walker.open(cellInput.value.trim());
  });

  const sections: [string, HTMLElement, () => void][] = [
    ['Walker', walkerRoot, () => undefined],
    ['What-if', whatifRoot, () => void whatif.load()],
    ['History', historyRoot, () => void history.load()],
  ];
  for (const [label, section, activate] of sections) {
    const button = el('button', { type: 'button' }, [label]);
    button.addEventListener('click', () => {
      clear(panelHost);
      panelHost.append(section);
      activate();
    });
    tabs.append(button);
  }
  panelHost.append(walkerRoot);

  void api
    .workbook()
    .then((summary) => {
      title.textContent = `${summary.name}: version ${summary.version}, revision ${summary.revision}`;
    })
    .catch(() => {
      title.textContent = 'Model workbench (service unreachable)';
    });
}

mount();
