/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_detector_size: (a: number) => number;
export const demo_drr: (a: number, b: number) => [number, number, number, number];
export const demo_new: (a: bigint) => [number, number, number];
export const demo_phantom_slice: (a: number, b: number) => [number, number];
export const demo_recon_slice: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const demo_reseed: (a: number, b: bigint) => [number, number];
export const demo_volume_size: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
