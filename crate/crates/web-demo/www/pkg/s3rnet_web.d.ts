/* tslint:disable */
/* eslint-disable */

export class EnergyReport {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Channel index of each entry in `energies`.
     */
    channels(): Uint32Array;
    /**
     * Normalised energies, largest first.
     */
    energies(): Float64Array;
    gini: number;
    params: number;
    top_quarter: number;
}

export class NoiseReport {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    clean_psnr: number;
    clean_sam: number;
    measured_snr_db: number;
    noisy_ergas: number;
    noisy_psnr: number;
    noisy_rmse: number;
    noisy_sam: number;
}

export class Preview {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * RGBA of the LR hyperspectral observation.
     */
    low(): Uint8Array;
    /**
     * RGBA of the HR multispectral observation.
     */
    multi(): Uint8Array;
    /**
     * RGBA of the HR target `Y`.
     */
    target(): Uint8Array;
    readonly low_side: number;
    readonly side: number;
}

/**
 * Simulate a scene and show `Y`, `X_h` and `X_m` side by side.
 */
export function degradation_preview(size: number, bands: number, msi_bands: number, scale: number, seed: bigint): Preview;

/**
 * Fused-channel energy of a freshly initialised small network.
 */
export function fused_energy(size: number, bands: number, msi_bands: number, scale: number, seed: bigint, kaiming: boolean): EnergyReport;

export function noise_metrics(size: number, bands: number, msi_bands: number, scale: number, seed: bigint, snr_db: number): NoiseReport;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_energyreport_free: (a: number, b: number) => void;
    readonly __wbg_get_energyreport_gini: (a: number) => number;
    readonly __wbg_get_energyreport_params: (a: number) => number;
    readonly __wbg_get_energyreport_top_quarter: (a: number) => number;
    readonly __wbg_get_noisereport_clean_psnr: (a: number) => number;
    readonly __wbg_get_noisereport_clean_sam: (a: number) => number;
    readonly __wbg_get_noisereport_measured_snr_db: (a: number) => number;
    readonly __wbg_get_noisereport_noisy_ergas: (a: number) => number;
    readonly __wbg_get_noisereport_noisy_psnr: (a: number) => number;
    readonly __wbg_get_noisereport_noisy_rmse: (a: number) => number;
    readonly __wbg_get_noisereport_noisy_sam: (a: number) => number;
    readonly __wbg_noisereport_free: (a: number, b: number) => void;
    readonly __wbg_preview_free: (a: number, b: number) => void;
    readonly __wbg_set_energyreport_gini: (a: number, b: number) => void;
    readonly __wbg_set_energyreport_params: (a: number, b: number) => void;
    readonly __wbg_set_energyreport_top_quarter: (a: number, b: number) => void;
    readonly __wbg_set_noisereport_clean_psnr: (a: number, b: number) => void;
    readonly __wbg_set_noisereport_clean_sam: (a: number, b: number) => void;
    readonly __wbg_set_noisereport_measured_snr_db: (a: number, b: number) => void;
    readonly __wbg_set_noisereport_noisy_ergas: (a: number, b: number) => void;
    readonly __wbg_set_noisereport_noisy_psnr: (a: number, b: number) => void;
    readonly __wbg_set_noisereport_noisy_rmse: (a: number, b: number) => void;
    readonly __wbg_set_noisereport_noisy_sam: (a: number, b: number) => void;
    readonly degradation_preview: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
    readonly energyreport_channels: (a: number) => [number, number];
    readonly energyreport_energies: (a: number) => [number, number];
    readonly fused_energy: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number];
    readonly noise_metrics: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number];
    readonly preview_low: (a: number) => [number, number];
    readonly preview_low_side: (a: number) => number;
    readonly preview_multi: (a: number) => [number, number];
    readonly preview_side: (a: number) => number;
    readonly preview_target: (a: number) => [number, number];
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
