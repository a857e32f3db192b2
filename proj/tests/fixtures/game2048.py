#!/usr/bin/env python3
"""Terminal 2048 with an optional greedy AI player."""
import argparse
import random

DIRECTIONS = ["up", "down", "left", "right"]
KEYS = {"w": "up", "s": "down", "a": "left", "d": "right"}


def new_board(size):
    board = [[0] * size for _ in range(size)]
    spawn_tile(board)
    spawn_tile(board)
    return board


def spawn_tile(board):
    empty = [(r, c) for r, row in enumerate(board) for c, v in enumerate(row) if v == 0]
    if empty:
        r, c = random.choice(empty)
        board[r][c] = 4 if random.random() < 0.1 else 2


def merge_row(row):
    tiles = [v for v in row if v]
    out, gain, i = [], 0, 0
    while i < len(tiles):
        if i + 1 < len(tiles) and tiles[i] == tiles[i + 1]:
            out.append(tiles[i] * 2)
            gain += tiles[i] * 2
            i += 2
        else:
            out.append(tiles[i])
            i += 1
    return out + [0] * (len(row) - len(out)), gain


def move(board, direction):
    size = len(board)
    rotated = rotate(board, direction)
    merged, gain = [], 0
    for row in rotated:
        new_row, g = merge_row(row)
        merged.append(new_row)
        gain += g
    result = unrotate(merged, direction)
    return result, gain, result != board


def rotate(board, direction):
    if direction == "left":
        return [row[:] for row in board]
    if direction == "right":
        return [row[::-1] for row in board]
    columns = [list(col) for col in zip(*board)]
    return columns if direction == "up" else [col[::-1] for col in columns]


def unrotate(board, direction):
    if direction in ("left", "right"):
        return rotate(board, direction)
    if direction == "down":
        board = [row[::-1] for row in board]
    return [list(col) for col in zip(*board)]


def game_over(board):
    return all(not move(board, d)[2] for d in DIRECTIONS)


def show(board, score):
    print(f"score: {score}")
    for row in board:
        print(" ".join(f"{v:5d}" if v else "    ." for v in row))


def play_ai(board, max_steps):
    # Greedy player: simulate every direction and take the best score gain.
    score, steps = 0, 0
    while not game_over(board) and steps < max_steps:
        gains = {}
        for direction in DIRECTIONS:
            _, gain, changed = move(board, direction)
            gains[direction] = gain if changed else -1
        best = max(gains, key=gains.get)
        if gains[best] < 0:
            break
        board, gain, _ = move(board, best)
        spawn_tile(board)
        score += gain
        steps += 1
        show(board, score)
    return board, score


def play_human(board):
    score = 0
    while not game_over(board):
        show(board, score)
        key = input("move (w/a/s/d, q to quit): ").strip().lower()
        if key == "q":
            break
        elif key in KEYS:
            board, gain, changed = move(board, KEYS[key])
            if changed:
                spawn_tile(board)
                score += gain
        else:
            print("use w, a, s or d to move and q to quit")
    return board, score


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--size", type=int, default=4)
    parser.add_argument("--ai", action="store_true")
    parser.add_argument("--max-steps", type=int, default=1000)
    parser.add_argument("--seed", type=int)
    args = parser.parse_args()
    random.seed(args.seed)
    board = new_board(args.size)
    if args.ai:
        board, score = play_ai(board, args.max_steps)
    else:
        board, score = play_human(board)
    print("final board:")
    show(board, score)


if __name__ == "__main__":
    main()
