import { ApiClient } from './api.js';
import { AnnotationController, Screen } from './controller.js';
import { verdictForKey } from './keyboard.js';
import { VERDICT_OPTIONS } from './verdicts.js';

const STORAGE_KEY = 'textfreq-annotator';

const app = document.getElementById('app');
if (!app) throw new Error('missing #app root');
const root: HTMLElement = app;

const api = new ApiClient((url, init) => fetch(url, init));
const controller = new AnnotationController(api, render);

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function render(screen: Screen): void {
  root.replaceChildren();
  switch (screen.kind) {
    case 'select-annotator':
      root.appendChild(renderSelect());
      break;
    case 'loading':
      root.appendChild(el('p', 'status', 'Loading…'));
      break;
    case 'annotating':
      root.appendChild(renderAnnotating(screen));
      break;
    case 'done':
      root.appendChild(renderDone(screen));
      break;
    case 'error':
      root.appendChild(renderError(screen));
      break;
  }
}

function renderSelect(): HTMLElement {
  sessionStorage.removeItem(STORAGE_KEY);
  const panel = el('div', 'panel');
  panel.appendChild(el('h1', 'title', 'Annotation'));
  panel.appendChild(el('p', 'hint', 'Enter your annotator id to begin.'));
  const form = document.createElement('form');
  const input = document.createElement('input');
  input.type = 'text';
  input.placeholder = 'annotator id';
  input.autofocus = true;
  const button = document.createElement('button');
  button.type = 'submit';
  button.textContent = 'Start';
  form.append(input, button);
  form.addEventListener('submit', (e) => {
    e.preventDefault();
    const id = input.value.trim();
    if (!id) return;
    sessionStorage.setItem(STORAGE_KEY, id);
    void controller.start(id);
  });
  panel.appendChild(form);
  return panel;
}

function renderAnnotating(screen: Extract<Screen, { kind: 'annotating' }>): HTMLElement {
  const panel = el('div', 'panel');
  if (screen.notice) panel.appendChild(el('p', 'notice', screen.notice));
  panel.appendChild(el('p', 'hint', 'Do these three sentences have the same meaning?'));
  const cards = el('div', 'cards');
  for (const sentence of screen.view.sentences) {
    cards.appendChild(el('blockquote', 'card', sentence));
  }
  panel.appendChild(cards);
  const buttons = el('div', 'verdicts');
  for (const option of VERDICT_OPTIONS) {
    const button = document.createElement('button');
    button.className = 'verdict';
    button.disabled = screen.submitting;
    button.appendChild(el('span', 'key', option.key));
    button.appendChild(el('span', 'label', option.label));
    button.addEventListener('click', () => void controller.submit(option.verdict));
    buttons.appendChild(button);
  }
  panel.appendChild(buttons);
  panel.appendChild(renderProgressLine());
  return panel;
}

function renderDone(screen: Extract<Screen, { kind: 'done' }>): HTMLElement {
  const panel = el('div', 'panel');
  panel.appendChild(el('h1', 'title', 'All done'));
  panel.appendChild(el('p', 'hint', 'No items are waiting for you right now.'));
  const counts = screen.progress.by_status;
  const summary = Object.keys(counts)
    .map((status) => `${status}: ${counts[status]}`)
    .join('   ');
  panel.appendChild(el('p', 'status', `Jobs ${screen.progress.total}   ${summary}`));
  panel.appendChild(el('p', 'status', `Judgments recorded: ${screen.progress.judgments}`));
  const again = document.createElement('button');
  again.textContent = 'Check again';
  again.addEventListener('click', () => void controller.fetchNext());
  panel.appendChild(again);
  return panel;
}

function renderError(screen: Extract<Screen, { kind: 'error' }>): HTMLElement {
  const panel = el('div', 'panel');
  panel.appendChild(el('p', 'notice', screen.message));
  const retry = document.createElement('button');
  retry.textContent = 'Retry';
  retry.addEventListener('click', () => void controller.retry());
  panel.appendChild(retry);
  return panel;
}

function renderProgressLine(): HTMLElement {
  const progress = controller.progress;
  if (!progress) return el('p', 'progress', '');
  const me = controller.annotator ? (progress.by_annotator[controller.annotator] ?? 0) : 0;
  return el(
    'p',
    'progress',
    `Your judgments: ${me}   Total jobs: ${progress.total}   All judgments: ${progress.judgments}`,
  );
}

document.addEventListener('keydown', (e) => {
  const target = e.target instanceof HTMLElement ? e.target : null;
  const verdict = verdictForKey({
    key: e.key,
    ctrlKey: e.ctrlKey,
    metaKey: e.metaKey,
    altKey: e.altKey,
    target,
  });
  if (verdict) void controller.submit(verdict);
});

const stored = sessionStorage.getItem(STORAGE_KEY);
if (stored) {
  void controller.start(stored);
} else {
  render(controller.screen);
}
