from foldsaddle.cli import main

raise SystemExit(main())
