/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_dimension_free: (a: number, b: number) => void;
export const __wbg_get_dimension_r_squared: (a: number) => number;
export const __wbg_get_dimension_scales: (a: number) => number;
export const __wbg_get_dimension_slope: (a: number) => number;
export const __wbg_set_dimension_r_squared: (a: number, b: number) => void;
export const __wbg_set_dimension_scales: (a: number, b: number) => void;
export const __wbg_set_dimension_slope: (a: number, b: number) => void;
export const box_dimension: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
export const interpolation_svg: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
export const trace_svg: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
