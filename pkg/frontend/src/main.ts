// Console entry point: connect, reduce messages, render.

import { render } from './render.js';
import { ConsoleSocket } from './socket.js';
import {
  applyMessage,
  commandSent,
  ConsoleState,
  initialState,
  noticeShown,
  setConnection,
} from './viewmodel.js';

let state: ConsoleState = initialState();

function update(next: ConsoleState): void {
  state = next;
  render(state);
}

const socket = new ConsoleSocket({
  onMessage: (raw) => update(applyMessage(state, raw)),
  onStatus: (status) => update(setConnection(state, status)),
  onNotice: (notice) => update(noticeShown(state, notice)),
});

function wireButtons(): void {
  document.querySelectorAll<HTMLButtonElement>('button[data-gesture]').forEach((btn) => {
    btn.addEventListener('click', () => {
      const id = socket.sendGesture(btn.dataset.gesture!);
      if (id !== null && socket.connected) {
        update(commandSent(state, id));
      }
    });
  });
  document.getElementById('reset-btn')!.addEventListener('click', () => {
    const id = socket.send('reset');
    if (id !== null && socket.connected) {
      update(commandSent(state, id));
    }
  });
}

wireButtons();
render(state);

const wsUrl = `ws://${location.host || '127.0.0.1:8765'}/`;
socket.connect(wsUrl);
