/* tslint:disable */
/* eslint-disable */

/**
 * Blow-up sets for the premodular zero of `(r, s)` at singularity `p`;
 * `p` defaults to the exceptional point when both parts are NaN.
 */
export function blowup(r: number, s: number, p_re: number, p_im: number): string;

/**
 * Traces `σ_j` (`j` = 1 or 2) of the non-even family at `℘(p) = wp` on the
 * square window `[-half, half]²` with `n` nodes per side.
 */
export function spectral_arcs(tau_re: number, tau_im: number, wp_re: number, wp_im: number, j: number, n: number, half: number): string;

/**
 * Hill discriminants of the generalized and classical equations at
 * corresponding parameters.
 */
export function trace_comparison(tau_re: number, tau_im: number, p_re: number, p_im: number, t_re: number, t_im: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly blowup: (a: number, b: number, c: number, d: number) => [number, number];
    readonly spectral_arcs: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
    readonly trace_comparison: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
