// Keyboard control: five distinct keys stand in for the five decoded commands.
//
// In noisy mode the server passes the posted (intended) command through its
// confusion matrix, so the user at the keyboard experiences the same error
// model a decoder would produce; the UI itself never alters commands.

import type { Command } from "./types.js";
import { COMMANDS } from "./types.js";

export type KeyMapping = Record<string, Command>;

export const DEFAULT_KEYS: KeyMapping = {
  ArrowUp: "go_up",
  ArrowDown: "go_down",
  Enter: "select",
  Backspace: "go_back",
  " ": "do_nothing",
};

export function validateMapping(mapping: KeyMapping): void {
  const keys = Object.keys(mapping);
  if (keys.length !== 5) {
    throw new Error(`need exactly 5 mapped keys, got ${keys.length}`);
  }
  const commands = new Set(Object.values(mapping));
  if (commands.size !== 5 || !COMMANDS.every((c) => commands.has(c))) {
    throw new Error("mapping must cover all five commands exactly once");
  }
}

export type KeyHandler = (key: string) => Command | null;

export function bindKeys(mapping: KeyMapping, post: (command: Command) => void): KeyHandler {
  validateMapping(mapping);
  return (key: string) => {
    const command = mapping[key];
    if (command === undefined) {
      return null; // unmapped keys are ignored
    }
    post(command);
    return command;
  };
}
