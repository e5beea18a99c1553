/* tslint:disable */
/* eslint-disable */

/**
 * Branch bifurcating near `lambda_star`, continued across `lambda_star ± epsilon`.
 */
export function branch(potential: string, kind: string, dim: number, lambda_star: number, epsilon: number): string;

/**
 * Predicted levels and degree-jump candidates for a builtin potential.
 */
export function levels(potential: string, kind: string, dim: number, cutoff: number): string;

/**
 * Laplace eigenvalues up to `cutoff` as JSON.
 */
export function spectrum(kind: string, dim: number, cutoff: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly branch: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
    readonly levels: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly spectrum: (a: number, b: number, c: number, d: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
