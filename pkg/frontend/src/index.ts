export { FigureSpec, FigureKind, FigureFormat, render, renderSvg,
         renderPngBuffer } from "./figure";
export { readCsv, toSeries, Series, SeriesPoint, SweepRow } from "./csv";
export { linearScale, LinearScale } from "./scale";
