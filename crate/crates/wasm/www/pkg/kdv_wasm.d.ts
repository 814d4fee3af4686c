/* tslint:disable */
/* eslint-disable */

/**
 * A trajectory of `∂_t u + ∂_x³u + ½∂_x(u²) + γu = f` advanced on demand.
 */
export class Evolution {
    free(): void;
    [Symbol.dispose](): void;
    advance(span: number): void;
    dt(): number;
    hamiltonian(): number;
    l2(): number;
    constructor(k: number, gamma: number, amplitude: number, forcing: number, seed: number);
    /**
     * `u(x_j)` at `x_j = 2πj/M` on the product grid.
     */
    profile(): Float64Array;
    /**
     * `|coeff(ξ)|` for `ξ = 1..=K`.
     */
    spectrum(): Float64Array;
    time(): number;
}

export function energyDrift(k: number, amplitude: number, n: number, s: number, t_end: number, frames: number, seed: number): Float64Array;

export function multiplierCurve(n: number, s: number, xi_max: number): Float64Array;

export function sigma3Slice(n: number, s: number, xi1: number, reach: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_evolution_free: (a: number, b: number) => void;
    readonly energyDrift: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly evolution_advance: (a: number, b: number) => [number, number];
    readonly evolution_dt: (a: number) => number;
    readonly evolution_hamiltonian: (a: number) => number;
    readonly evolution_l2: (a: number) => number;
    readonly evolution_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly evolution_profile: (a: number) => [number, number];
    readonly evolution_spectrum: (a: number) => [number, number];
    readonly evolution_time: (a: number) => number;
    readonly multiplierCurve: (a: number, b: number, c: number) => [number, number, number, number];
    readonly sigma3Slice: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
