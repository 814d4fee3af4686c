/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_evolution_free: (a: number, b: number) => void;
export const energyDrift: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const evolution_advance: (a: number, b: number) => [number, number];
export const evolution_dt: (a: number) => number;
export const evolution_hamiltonian: (a: number) => number;
export const evolution_l2: (a: number) => number;
export const evolution_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const evolution_profile: (a: number) => [number, number];
export const evolution_spectrum: (a: number) => [number, number];
export const evolution_time: (a: number) => number;
export const multiplierCurve: (a: number, b: number, c: number) => [number, number, number, number];
export const sigma3Slice: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
