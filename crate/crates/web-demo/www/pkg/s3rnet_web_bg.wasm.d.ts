/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_energyreport_free: (a: number, b: number) => void;
export const __wbg_get_energyreport_gini: (a: number) => number;
export const __wbg_get_energyreport_params: (a: number) => number;
export const __wbg_get_energyreport_top_quarter: (a: number) => number;
export const __wbg_get_noisereport_clean_psnr: (a: number) => number;
export const __wbg_get_noisereport_clean_sam: (a: number) => number;
export const __wbg_get_noisereport_measured_snr_db: (a: number) => number;
export const __wbg_get_noisereport_noisy_ergas: (a: number) => number;
export const __wbg_get_noisereport_noisy_psnr: (a: number) => number;
export const __wbg_get_noisereport_noisy_rmse: (a: number) => number;
export const __wbg_get_noisereport_noisy_sam: (a: number) => number;
export const __wbg_noisereport_free: (a: number, b: number) => void;
export const __wbg_preview_free: (a: number, b: number) => void;
export const __wbg_set_energyreport_gini: (a: number, b: number) => void;
export const __wbg_set_energyreport_params: (a: number, b: number) => void;
export const __wbg_set_energyreport_top_quarter: (a: number, b: number) => void;
export const __wbg_set_noisereport_clean_psnr: (a: number, b: number) => void;
export const __wbg_set_noisereport_clean_sam: (a: number, b: number) => void;
export const __wbg_set_noisereport_measured_snr_db: (a: number, b: number) => void;
export const __wbg_set_noisereport_noisy_ergas: (a: number, b: number) => void;
export const __wbg_set_noisereport_noisy_psnr: (a: number, b: number) => void;
export const __wbg_set_noisereport_noisy_rmse: (a: number, b: number) => void;
export const __wbg_set_noisereport_noisy_sam: (a: number, b: number) => void;
export const degradation_preview: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
export const energyreport_channels: (a: number) => [number, number];
export const energyreport_energies: (a: number) => [number, number];
export const fused_energy: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number];
export const noise_metrics: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number];
export const preview_low: (a: number) => [number, number];
export const preview_low_side: (a: number) => number;
export const preview_multi: (a: number) => [number, number];
export const preview_side: (a: number) => number;
export const preview_target: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
