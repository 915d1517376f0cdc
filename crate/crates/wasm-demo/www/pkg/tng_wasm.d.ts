/* tslint:disable */
/* eslint-disable */

/**
 * An x grid with up to three series over it.
 */
export class Curves {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    count(): number;
    series(k: number): Float64Array;
    x(): Float64Array;
}

export function bondCurves(face: number, maturity: number, rate: number, sigma: number, points: number): Curves;

export function survivalCurves(beta: number, gamma: number, paths: number, steps: number, seed: number, bridge: boolean): Curves;

export function trancheCurves(beta: number, recovery: number, paths: number, seed: number, points: number): Curves;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_curves_free: (a: number, b: number) => void;
    readonly bondCurves: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly curves_count: (a: number) => number;
    readonly curves_series: (a: number, b: number) => [number, number];
    readonly curves_x: (a: number) => [number, number];
    readonly survivalCurves: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly trancheCurves: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
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
