export {
  CmxFormatError,
  ComplexMatrix,
  formatCmx,
  frobenius,
  fromRows,
  makeMatrix,
  parseCmx,
  sameBits,
} from "./cmx.js";
export {
  CoreError,
  CoreOptions,
  CoreUsageError,
  Scratch,
  runCore,
  withScratch,
} from "./core.js";
export {
  EvdJvp,
  GaugePolicy,
  GradOptions,
  SvdJvp,
  SvdMode,
  VERSION,
  bindJvpEvd,
  bindJvpSvd,
  genMatrix,
  svdValues,
} from "./bridge.js";
export {
  Dual,
  EvdPrimitiveConfig,
  Primitive,
  SvdPrimitiveConfig,
  add,
  callPrimitive,
  defaultStep,
  getPrimitive,
  numericalTangent,
  registerKeptEigenvalues,
  registerPrimitive,
  registerTruncatedSvd,
  scale,
  singularValues,
} from "./autodiff.js";
