export {
  Curve,
  CurvePoint,
  SchemaError,
  assertSharedEpisodeAxis,
  parseCurveCsv,
  readCurve,
} from "./csv.js";
export {
  PlotSeriesSpec,
  PlotSpec,
  RenderedSeries,
  loadSpec,
  prepareSeries,
  renderCurves,
  renderSvg,
} from "./plot.js";
