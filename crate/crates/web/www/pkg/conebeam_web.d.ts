/* tslint:disable */
/* eslint-disable */

/**
 * Demo state: one geometry and the current phantom.
 */
export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    detector_size(): number;
    /**
     * DRR of the phantom at `theta_deg`, u fastest.
     */
    drr(theta_deg: number): Float32Array;
    constructor(seed: bigint);
    /**
     * Axial slice `k` of the phantom, x fastest.
     */
    phantom_slice(k: number): Float32Array;
    /**
     * Axial slice of a reconstruction from `n_views` input views: the raw
     * back-projection when `sart_sweeps` is 0, otherwise SART started from
     * the normalised back-projection.
     */
    recon_slice(n_views: number, sart_sweeps: number, k: number): Float32Array;
    /**
     * Regenerates the phantom from a new seed.
     */
    reseed(seed: bigint): void;
    volume_size(): number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_detector_size: (a: number) => number;
    readonly demo_drr: (a: number, b: number) => [number, number, number, number];
    readonly demo_new: (a: bigint) => [number, number, number];
    readonly demo_phantom_slice: (a: number, b: number) => [number, number];
    readonly demo_recon_slice: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly demo_reseed: (a: number, b: bigint) => [number, number];
    readonly demo_volume_size: (a: number) => number;
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
