/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const axial_modes: (a: number, b: number) => [number, number, number, number];
export const stability_boundary: (a: number, b: number) => [number, number, number, number];
export const transverse_modes: (a: number, b: number, c: number) => [number, number, number, number];
export const version: () => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
