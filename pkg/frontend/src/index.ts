export {
  CSV_COLUMNS,
  FAMILIES,
  loadDataset,
  parseRecordsCsv,
  datasetDist,
  datasetLambda,
  type Dataset,
  type ExperimentRecord,
  type Family,
  type Sidecar,
} from "./schema.js";
export {
  parseDist,
  moments,
  isHeavyTailed,
  rStarClosedForm,
  heavyTailSlope,
  type DistSpec,
  type Moments,
} from "./dist.js";
export { renderSvg, type FigureModel, type Overlay, type Point, type Series } from "./svg.js";
export { buildFigure } from "./figures.js";
export { renderFile, type PlotOptions } from "./cli.js";
