from hyperstab.cli import main

raise SystemExit(main())
