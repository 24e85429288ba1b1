// Keyboard and gamepad sampling. Axes are world-oriented: +dy is up.

export type Scheme = "wasd" | "arrows";

const BINDINGS: Record<Scheme, Record<string, [number, number]>> = {
  wasd: {
    KeyW: [0, 1],
    KeyS: [0, -1],
    KeyA: [-1, 0],
    KeyD: [1, 0],
  },
  arrows: {
    ArrowUp: [0, 1],
    ArrowDown: [0, -1],
    ArrowLeft: [-1, 0],
    ArrowRight: [1, 0],
  },
};

export interface KeySource {
  has(code: string): boolean;
}

export function axesFromKeys(keys: KeySource, scheme: Scheme): [number, number] {
  let dx = 0;
  let dy = 0;
  for (const [code, [vx, vy]] of Object.entries(BINDINGS[scheme])) {
    if (keys.has(code)) {
      dx += vx;
      dy += vy;
    }
  }
  return [Math.max(-1, Math.min(1, dx)), Math.max(-1, Math.min(1, dy))];
}

export interface PadLike {
  axes: ReadonlyArray<number>;
}

/** Left stick; browser pads report +y down, the game wants +y up. */
export function axesFromGamepad(pad: PadLike | null, dead = 0.15): [number, number] {
  if (!pad || pad.axes.length < 2) return [0, 0];
  const raw: [number, number] = [pad.axes[0], -pad.axes[1]];
  return raw.map((v) => {
    if (Math.abs(v) < dead) return 0;
    return Math.max(-1, Math.min(1, v));
  }) as [number, number];
}

/** Keyboard wins while any key is held; the pad fills in otherwise. */
export function mergeAxes(kb: [number, number], pad: [number, number]): [number, number] {
  if (kb[0] !== 0 || kb[1] !== 0) return kb;
  return pad;
}

export class SeqCounter {
  private n = 0;

  next(): number {
    this.n += 1;
    return this.n;
  }
}

/** Wires key listeners into a set; blur clears held keys so an agent
 * never keeps walking when the tab loses focus. */
export function attachKeyboard(target: {
  addEventListener(type: string, fn: (ev: any) => void): void;
}): KeySource {
  const held = new Set<string>();
  target.addEventListener("keydown", (ev: KeyboardEvent) => {
    held.add(ev.code);
    if (ev.code.startsWith("Arrow")) ev.preventDefault();
  });
  target.addEventListener("keyup", (ev: KeyboardEvent) => held.delete(ev.code));
  target.addEventListener("blur", () => held.clear());
  return { has: (code) => held.has(code) };
}
