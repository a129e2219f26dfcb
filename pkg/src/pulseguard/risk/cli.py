"""risk-model command line: train on a cohort CSV, score feature CSVs."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from pulseguard.risk.model import Hyperparams, load_model, predict_record, save_model, train
from pulseguard.vitals.cohort import cohort_from_csv


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="risk-model")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit a model from a cohort CSV")
    p_train.add_argument("--cohort", required=True, help="cohort CSV path")
    p_train.add_argument("--out", required=True, help="model JSON output path")
    p_train.add_argument("--seed", type=int, default=1)
    p_train.add_argument("--epochs", type=int, default=Hyperparams.epochs)
    p_train.add_argument("--learning-rate", type=float, default=Hyperparams.learning_rate)
    p_train.add_argument("--l2-lambda", type=float, default=Hyperparams.l2_lambda)

    p_pred = sub.add_parser("predict", help="score records from a feature CSV")
    p_pred.add_argument("--model", required=True, help="model JSON path")
    p_pred.add_argument("--features", required=True, help="CSV with feature columns")

    args = parser.parse_args(argv)

    if args.command == "train":
        cohort = cohort_from_csv(Path(args.cohort).read_text(encoding="utf-8"))
        hyper = Hyperparams(
            learning_rate=args.learning_rate,
            epochs=args.epochs,
            l2_lambda=args.l2_lambda,
        )
        model = train(cohort, hyper, seed=args.seed)
        save_model(model, args.out)
        meta = model.metadata
        print(
            f"trained on {meta['n_train']} rows; final loss {meta['final_loss']:.4f}; "
            f"holdout AUC {meta.get('holdout_auc', float('nan')):.4f}"
        )
        return 0

    model = load_model(args.model)
    with open(args.features, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            rec = {
                k: (None if v == "" else v) for k, v in rec.items()
            }
            for k in list(rec):
                if k not in ("race", "patient_id") and rec[k] is not None:
                    rec[k] = float(rec[k])
            prob = predict_record(model, rec)
            ident = rec.get("patient_id", "")
            print(f"{ident},{prob:.6f}" if ident else f"{prob:.6f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
