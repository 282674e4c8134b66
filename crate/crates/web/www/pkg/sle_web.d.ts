/* tslint:disable */
/* eslint-disable */

export class Dimension {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    r_squared: number;
    scales: number;
    slope: number;
}

/**
 * Box-counting dimension of a freshly simulated trace.
 */
export function box_dimension(kind: string, parameter: number, kappa: number, steps: number, seed: bigint): Dimension;

/**
 * Piecewise-constant driver (grey) against its power interpolation (black).
 */
export function interpolation_svg(kappa: number, coarse_steps: number, exponent: number, factor: number, seed: bigint): string;

/**
 * Simulates one trace and returns it as SVG markup.
 */
export function trace_svg(kind: string, parameter: number, kappa: number, steps: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_dimension_free: (a: number, b: number) => void;
    readonly __wbg_get_dimension_r_squared: (a: number) => number;
    readonly __wbg_get_dimension_scales: (a: number) => number;
    readonly __wbg_get_dimension_slope: (a: number) => number;
    readonly __wbg_set_dimension_r_squared: (a: number, b: number) => void;
    readonly __wbg_set_dimension_scales: (a: number, b: number) => void;
    readonly __wbg_set_dimension_slope: (a: number, b: number) => void;
    readonly box_dimension: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
    readonly interpolation_svg: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly trace_svg: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
