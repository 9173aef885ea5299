/** Pure viewer state machine: every input event maps (state, event, dt) ->
 * state with no I/O, so the whole control surface is unit-testable headless.
 *
 * Convention matches the renderer: camera +x right, +y down, +z forward.
 * The camera-to-world rotation is yaw about the world -y (up) axis composed
 * with pitch about the camera x axis; identity state is the identity pose.
 */

export type ViewMode = "raw" | "filtered" | "neural";

export interface FilterSettings {
  levels: number;
  filterStrength: number;
  edgeThreshold: number;
}

export interface ViewerState {
  position: [number, number, number];
  yaw: number;    // radians
  pitch: number;  // radians, clamped to +-89 degrees
  mode: ViewMode;
  filter: FilterSettings;
  speed: number;  // meters per second
  fpsEma: number;
  bridgeAvailable: boolean;
  maxLevels: number;
  notice: string | null;
}

export type InputEvent =
  | { kind: "key"; key: string }
  | { kind: "drag"; dx: number; dy: number }
  | { kind: "frame-rendered"; frameMs: number };

export const MODES: ViewMode[] = ["raw", "filtered", "neural"];
const PITCH_LIMIT = (89 * Math.PI) / 180;
const STRENGTH_STEP = 1.25;
const STRENGTH_MAX = 1e30;
const DRAG_RADIANS_PER_PX = 0.005;
const FPS_EMA_ALPHA = 0.1;

export function initialState(opts: {
  bridgeAvailable: boolean;
  maxLevels: number;
  filter?: Partial<FilterSettings>;
}): ViewerState {
  return {
    position: [0, 0, 0],
    yaw: 0,
    pitch: 0,
    mode: "filtered",
    filter: {
      levels: Math.min(opts.filter?.levels ?? 4, opts.maxLevels),
      filterStrength: opts.filter?.filterStrength ?? 0.1,
      edgeThreshold: opts.filter?.edgeThreshold ?? 0.25,
    },
    speed: 1.0,
    fpsEma: 0,
    bridgeAvailable: opts.bridgeAvailable,
    maxLevels: opts.maxLevels,
    notice: null,
  };
}

/** Camera axes in world coordinates for the current yaw/pitch. */
export function cameraAxes(state: ViewerState): {
  right: [number, number, number];
  down: [number, number, number];
  forward: [number, number, number];
} {
  const cy = Math.cos(state.yaw), sy = Math.sin(state.yaw);
  const cp = Math.cos(state.pitch), sp = Math.sin(state.pitch);
  // yaw about world -y (up), then pitch about the camera x axis
  return {
    right: [cy, 0, -sy],
    down: [sy * sp, cp, cy * sp],
    forward: [sy * cp, -sp, cy * cp],
  };
}

/** Row-major 4x4 camera-to-world matrix (columns = camera axes, origin = position). */
export function cameraToWorld(state: ViewerState): number[] {
  const { right, down, forward } = cameraAxes(state);
  const p = state.position;
  return [
    right[0], down[0], forward[0], p[0],
    right[1], down[1], forward[1], p[1],
    right[2], down[2], forward[2], p[2],
    0, 0, 0, 1,
  ];
}

function clamp(v: number, lo: number, hi: number): number {
  return Math.min(Math.max(v, lo), hi);
}

function move(state: ViewerState, axis: [number, number, number], amount: number): ViewerState {
  return {
    ...state,
    position: [
      state.position[0] + axis[0] * amount,
      state.position[1] + axis[1] * amount,
      state.position[2] + axis[2] * amount,
    ],
  };
}

/** Pure transition; `dt` in seconds applies to translation keys. */
export function handleInput(state: ViewerState, event: InputEvent, dt = 1 / 60): ViewerState {
  if (event.kind === "drag") {
    return {
      ...state,
      yaw: state.yaw + event.dx * DRAG_RADIANS_PER_PX,
      pitch: clamp(state.pitch + event.dy * DRAG_RADIANS_PER_PX, -PITCH_LIMIT, PITCH_LIMIT),
    };
  }
  if (event.kind === "frame-rendered") {
    const fps = 1000 / Math.max(event.frameMs, 1e-3);
    const ema = state.fpsEma === 0 ? fps : state.fpsEma + FPS_EMA_ALPHA * (fps - state.fpsEma);
    return { ...state, fpsEma: ema };
  }
  const axes = cameraAxes(state);
  const step = state.speed * dt;
  switch (event.key) {
    case "w": return move(state, axes.forward, step);
    case "s": return move(state, axes.forward, -step);
    case "a": return move(state, axes.right, -step);
    case "d": return move(state, axes.right, step);
    case "q": return move(state, axes.down, -step);  // up
    case "e": return move(state, axes.down, step);   // down
    case "]":
      return {
        ...state,
        filter: {
          ...state.filter,
          filterStrength: clamp(state.filter.filterStrength * STRENGTH_STEP, 0, STRENGTH_MAX),
        },
      };
    case "[":
      return {
        ...state,
        filter: {
          ...state.filter,
          filterStrength: clamp(state.filter.filterStrength / STRENGTH_STEP, 0, STRENGTH_MAX),
        },
      };
    case "+":
    case "=":
      return {
        ...state,
        filter: { ...state.filter, levels: clamp(state.filter.levels + 1, 1, state.maxLevels) },
      };
    case "-":
      return {
        ...state,
        filter: { ...state.filter, levels: clamp(state.filter.levels - 1, 1, state.maxLevels) },
      };
    case "m":
    case "M": {
      const dir = event.key === "m" ? 1 : MODES.length - 1;
      const next = MODES[(MODES.indexOf(state.mode) + dir) % MODES.length];
      if (next === "neural" && !state.bridgeAvailable) {
        // refused: mode unchanged, notice shown
        return { ...state, notice: "neural mode unavailable: no bridge configured" };
      }
      return { ...state, mode: next, notice: null };
    }
    default:
      return state;
  }
}
